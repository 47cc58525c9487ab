import pytest

from quantum_frenet import __version__
from quantum_frenet.cli import _parse_values, build_parser, main
from quantum_frenet.exceptions import InvalidConfigError


def _exit_code(argv):
    with pytest.raises(SystemExit) as excinfo:
        main(argv)
    return excinfo.value.code


def test_parse_values():
    assert _parse_values("0.1, 1.0,,2") == [0.1, 1.0, 2.0]
    assert _parse_values("") == []
    with pytest.raises(InvalidConfigError, match="--values"):
        _parse_values("0.1,fast")


def test_parser_requires_a_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_version(capsys):
    assert _exit_code(["--version"]) == 0
    assert __version__ in capsys.readouterr().out


def test_run(tmp_path, write_config, rabi_config, capsys):
    main(["run", str(write_config(rabi_config)), "-o", str(tmp_path / "out")])
    assert (tmp_path / "out" / "trajectory.csv").exists()
    assert (tmp_path / "out" / "run.json").exists()
    assert "🎉 Done" in capsys.readouterr().out


def test_run_with_invalid_config(tmp_path, write_config, rabi_config, capsys):
    rabi_config["initial_state"]["theta"] = -1.0
    assert _exit_code(["run", str(write_config(rabi_config)), "-o", str(tmp_path)]) == 2
    assert "❌ Error: initial_state.theta" in capsys.readouterr().err


def test_run_with_missing_config(tmp_path):
    assert _exit_code(["run", str(tmp_path / "missing.json"), "-o", str(tmp_path)]) == 2


def test_run_into_unwritable_output(tmp_path, write_config, rabi_config, capsys):
    blocker = tmp_path / "blocker"
    blocker.write_text("", encoding="utf-8")
    assert _exit_code(["run", str(write_config(rabi_config)), "-o", str(blocker)]) == 4
    assert "❌ Error:" in capsys.readouterr().err


def test_sweep(tmp_path, write_config, rabi_config):
    rabi_config["outputs"] = ["csv"]
    main(["sweep", str(write_config(rabi_config)), "--param", "Omega0", "--values", "0.1,1.0",
          "-o", str(tmp_path / "sweep")])
    assert (tmp_path / "sweep" / "sweep_summary.csv").exists()


@pytest.mark.parametrize("values", ["", "0.1,fast"])
def test_sweep_with_bad_values(tmp_path, write_config, rabi_config, values):
    argv = ["sweep", str(write_config(rabi_config)), "--param", "Omega0", "--values", values, "-o", str(tmp_path)]
    assert _exit_code(argv) == 2


def test_validate_with_zero_draws():
    assert _exit_code(["validate", "--draws", "0"]) == 2


@pytest.mark.slow
def test_validate(capsys):
    main(["validate", "--seed", "7", "--draws", "10"])
    assert "checks passed" in capsys.readouterr().out
