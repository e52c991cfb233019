"""Config parsing, defaults, validation, and snapshot round trips."""

import pytest

from infotrack.config import TrackerConfig, load_config_file, parse_config_text


def test_parse_skips_comments_and_blanks():
    text = "\n".join([
        "# search settings",
        "",
        "sampler.n = 60",
        "  # indented comment",
        "svm.gamma=0.5",
    ])
    assert parse_config_text(text) == {"sampler.n": "60", "svm.gamma": "0.5"}


def test_parse_errors_carry_line_numbers():
    with pytest.raises(ValueError, match="line 3"):
        parse_config_text("a=1\n\nnot a setting\n")
    with pytest.raises(ValueError, match="line 1: empty key"):
        parse_config_text("=5\n")


def test_defaults_resolve_from_an_empty_mapping():
    cfg = TrackerConfig.from_mapping({})
    assert cfg.m == 10
    assert cfg.delta == 10
    assert cfg.svm_budget == 100
    assert cfg.sampler.n == 120
    assert cfg.features.dim == 104
    assert cfg.critic.sigma_dx is None


def test_unknown_keys_are_rejected():
    with pytest.raises(ValueError, match="unknown config keys.*svm.nu"):
        TrackerConfig.from_mapping({"svm.nu": "0.5"})


def test_bad_values_name_the_key():
    with pytest.raises(ValueError, match="tracker.m"):
        TrackerConfig.from_mapping({"tracker.m": "many"})
    with pytest.raises(ValueError, match="boolean"):
        TrackerConfig.from_mapping({"features.include_histogram": "maybe"})


def test_field_validation():
    with pytest.raises(ValueError, match="tracker.m"):
        TrackerConfig(m=0)
    with pytest.raises(ValueError, match="tracker.delta"):
        TrackerConfig(delta=0)
    with pytest.raises(ValueError, match="epsilon"):
        TrackerConfig(epsilon=0.0)


def test_mapping_round_trip():
    cfg = TrackerConfig.from_mapping({
        "seed": "7",
        "tracker.delta": "5",
        "svm.gamma": "0.9",
        "sampler.n": "40",
        "features.haar_kinds": "h2,v2",
        "features.include_histogram": "false",
        "critic.sigma_dx": "3.5",
    })
    snap = cfg.to_mapping()
    clone = TrackerConfig.from_mapping(snap)
    assert clone == cfg
    assert clone.to_mapping() == snap
    assert snap["critic.sigma_dy"] == "auto"
    assert snap["features.haar_kinds"] == "h2,v2"


def test_optional_sigmas_accept_auto_and_none():
    for word in ("auto", "none", "NONE"):
        cfg = TrackerConfig.from_mapping({"critic.sigma_ds": word})
        assert cfg.critic.sigma_ds is None
    cfg = TrackerConfig.from_mapping({"critic.sigma_ds": "0.02"})
    assert cfg.critic.sigma_ds == 0.02


def test_load_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("tracker.m=4\n# comment\nsvm.c=2.0\n")
    cfg = TrackerConfig.from_mapping(load_config_file(str(path)))
    assert cfg.m == 4
    assert cfg.svm_c == 2.0
