from __future__ import annotations

import pytest

from relcont.config import get_settings, reset_settings
from relcont.errors import ConfigError
from relcont.log import fail, log


def test_settings_read_the_environment_once(monkeypatch):
    settings = get_settings()
    assert settings.threads == 2
    assert settings.quiet
    monkeypatch.setenv("RELCONT_THREADS", "5")
    assert get_settings() is settings
    reset_settings()
    assert get_settings().threads == 5


@pytest.mark.parametrize("value", ["0", "many"])
def test_bad_thread_count_is_a_config_error(monkeypatch, value):
    monkeypatch.setenv("RELCONT_THREADS", value)
    reset_settings()
    with pytest.raises(ConfigError):
        get_settings()


def test_quiet_mode_keeps_failures_visible(capsys):
    log("Test", "hidden line")
    fail("Test", "visible line")
    err = capsys.readouterr().err
    assert "hidden line" not in err
    assert "[FAIL] [Test] visible line" in err
