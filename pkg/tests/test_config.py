import pytest

from deco.config import ExperimentConfig, print_defaults
from deco.registry import load_registry


@pytest.fixture(scope="module")
def registry():
    return load_registry()


def test_defaults(registry):
    cfg = ExperimentConfig()
    assert cfg.seeds == [0, 1, 2]
    assert cfg.chaining_m == 6
    assert cfg.planner == "mock"
    assert cfg.validate(registry) == []


def test_print_defaults_is_yaml_round_trippable(tmp_path):
    text = print_defaults()
    path = tmp_path / "cfg.yaml"
    path.write_text(text)
    cfg = ExperimentConfig.from_yaml(path)
    assert cfg == ExperimentConfig()


def test_from_yaml_partial_override(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text("chaining_m: 2\nseeds: [5]\n")
    cfg = ExperimentConfig.from_yaml(path)
    assert cfg.chaining_m == 2
    assert cfg.seeds == [5]
    assert cfg.planner == "mock"


def test_from_yaml_rejects_unknown_keys(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text("chainnig_m: 2\n")
    with pytest.raises(ValueError, match="chainnig_m"):
        ExperimentConfig.from_yaml(path)


def test_validation_lists_all_errors(registry):
    cfg = ExperimentConfig(tasks=["no_such_task", "also_missing"], planner="llm",
                           episodes=0, seeds=[])
    errors = cfg.validate(registry)
    assert any("no_such_task" in e for e in errors)
    assert any("also_missing" in e for e in errors)
    assert any("planner" in e for e in errors)
    assert any("episodes" in e for e in errors)
    assert any("seeds" in e for e in errors)


def test_resolve_selectors(registry):
    assert len(ExperimentConfig(tasks=["atomic"]).resolve_tasks(registry)) == 10
    assert len(ExperimentConfig(tasks=["compositional"]).resolve_tasks(registry)) == 12
    assert len(ExperimentConfig(tasks=["all"]).resolve_tasks(registry)) == 22
    both = ExperimentConfig(tasks=["all", "open_drawer"]).resolve_tasks(registry)
    assert len(both) == 22  # no duplicates


def test_resolve_explicit_ids(registry):
    cfg = ExperimentConfig(tasks=["open_drawer", "sweep_and_drop"])
    assert [t.id for t in cfg.resolve_tasks(registry)] == ["open_drawer", "sweep_and_drop"]
