import pytest

from config import Config


@pytest.fixture
def restore_config():
    saved = {key: getattr(Config, key) for key in Config.TOLERANCE_KEYS + ('K_MAX', 'LOG_LEVEL')}
    yield
    for key, value in saved.items():
        setattr(Config, key, value)


def test_defaults_validate():
    assert Config.validate()


def test_tolerances_cover_every_key():
    tolerances = Config.get_tolerances()
    for key in Config.TOLERANCE_KEYS:
        assert tolerances[key.lower()] == getattr(Config, key)
    assert tolerances['k_max'] == Config.K_MAX
    assert tolerances['dim_cap'] == Config.DIM_CAP


def test_overrides_are_case_insensitive(restore_config):
    applied = Config.apply_overrides({'pure_tol': '1e-6', 'RANK_CUT': '1e-10'})
    assert applied == {'pure_tol': 1e-6, 'rank_cut': 1e-10}
    assert Config.PURE_TOL == 1e-6


def test_override_errors(restore_config):
    with pytest.raises(KeyError):
        Config.apply_overrides({'UNKNOWN_TOL': '1'})
    with pytest.raises(ValueError):
        Config.apply_overrides({'PSD_REL_TOL': '0'})
    with pytest.raises(ValueError):
        Config.apply_overrides({'PSD_REL_TOL': 'small'})


def test_validate_collects_errors(restore_config):
    Config.K_MAX = 0
    Config.LOG_LEVEL = 'LOUD'
    with pytest.raises(ValueError, match="Configuration errors") as info:
        Config.validate()
    assert 'K_MAX' in str(info.value)
    assert 'LOG_LEVEL' in str(info.value)


def test_plateau_config():
    assert Config.get_plateau_config() == {
        'window': Config.PLATEAU_WINDOW,
        'rel_tol': Config.PLATEAU_REL_TOL,
        'abs_tol': Config.PLATEAU_ABS_TOL,
    }
