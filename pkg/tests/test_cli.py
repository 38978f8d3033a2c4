import json
import subprocess
import sys

import pytest
import yaml

from photoion.cli import EXIT_CONFIG, EXIT_DEVIATION, EXIT_DOMAIN, EXIT_OK, main
from photoion.config import defaults_text


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def value_of(text, label):
    for line in text.splitlines():
        if line.startswith(label):
            return float(line[len(label):].split()[0])
    raise KeyError(label)


def test_shg_period(capsys):
    code, out, _ = run(capsys, "shg", "period", "--lambda", "846", "--temp", "20")
    assert code == EXIT_OK
    assert value_of(out, "poling period") == pytest.approx(4.05, rel=0.02)
    assert "µm" in out


def test_shg_efficiency(capsys):
    code, out, _ = run(capsys, "shg", "efficiency", "--pump-mw", "119", "--shg-uw", "315.5", "--length-cm", "2")
    assert code == EXIT_OK
    assert value_of(out, "normalized efficiency") == pytest.approx(1.11, rel=0.005)
    assert "%/(W·cm)" in out


def test_shg_tune_writes_csv(capsys, tmp_path):
    target = tmp_path / "tune.csv"
    code, out, _ = run(capsys, "shg", "tune", "--out", str(target))
    assert code == EXIT_OK
    assert value_of(out, "peak normalized power") == pytest.approx(1.0, abs=1e-3)
    lines = target.read_text().splitlines()
    assert lines[0] == "temperature_C,normalized_power"


def test_shg_power(capsys):
    code, out, _ = run(capsys, "shg", "power")
    assert code == EXIT_OK and "mW" in out


def test_optics_commands(capsys):
    code, out, _ = run(capsys, "optics", "image", "--train", "led_relay")
    assert code == EXIT_OK
    assert value_of(out, "magnification") == pytest.approx(0.2, abs=1e-12)
    assert value_of(out, "geometric image size") == pytest.approx(200.0, abs=1e-9)
    code, out, _ = run(capsys, "optics", "budget")
    assert value_of(out, "power 365-391 nm at trap") == pytest.approx(150.0, rel=0.1)
    assert "[fitted]" in out
    code, out, _ = run(capsys, "optics", "intensity", "--power-uw", "150", "--spot-um", "250")
    assert value_of(out, "intensity") == pytest.approx(3.06, rel=0.02)
    code, out, _ = run(capsys, "optics", "collect")
    assert value_of(out, "collected power") == pytest.approx(210.0, rel=0.01)


def test_ion_commands(capsys):
    code, out, _ = run(capsys, "ion", "rydberg", "--n", "40")
    assert code == EXIT_OK and value_of(out, "wavelength") == pytest.approx(390.93, abs=0.01)
    code, out, _ = run(capsys, "ion", "excite", "--i", "3.7", "--isat", "3.7")
    assert value_of(out, "excited fraction") == pytest.approx(0.25)
    code, out, _ = run(capsys, "ion", "field", "--n", "40")
    assert value_of(out, "field-ionization threshold") == pytest.approx(125.5, rel=0.01)
    code, out, _ = run(capsys, "ion", "load")
    assert code == EXIT_OK and "ions/s" in out


def test_jumps_commands(capsys, tmp_path):
    code, out, _ = run(capsys, "jumps", "infer", "--rate", "0.5", "--spot-um", "250")
    assert code == EXIT_OK
    assert value_of(out, "resonant power") == pytest.approx(13.7, rel=0.05)
    assert value_of(out, "resonant intensity") == pytest.approx(279.0, rel=0.05)
    code, out, _ = run(capsys, "jumps", "simulate", "--seed", "1", "--duration", "0")
    assert code == EXIT_OK
    assert out.strip() == "t_start_s,state,duration_s"
    trace = tmp_path / "trace.csv"
    code, _, _ = run(capsys, "--seed", "4", "jumps", "simulate", "--duration", "500", "--out", str(trace))
    assert code == EXIT_OK
    code, out, _ = run(capsys, "jumps", "estimate", "--trace", str(trace))
    assert code == EXIT_OK and "rate_qj_hz=" in out
    code, out, _ = run(capsys, "jumps", "estimate")
    rate, se = value_of(out, "rate_qj_hz="), value_of(out, "rate_qj_se_hz=")
    assert abs(rate - 0.5) <= 3 * se


def test_json_output(capsys):
    code, out, _ = run(capsys, "--json", "ion", "field", "--n", "40")
    assert code == EXIT_OK
    items = json.loads(out)
    assert items[0]["unit"] == "V/cm"
    code, out, _ = run(capsys, "--json", "jumps", "estimate", "--duration", "100")
    assert "rate_qj_hz" in json.loads(out)


def test_domain_error_exit(capsys):
    code, _, err = run(capsys, "ion", "rydberg", "--n", "3")
    assert code == EXIT_DOMAIN and "domain error" in err
    code, _, err = run(capsys, "--seed", "1", "jumps", "simulate", "--tau", "-1")
    assert code == EXIT_DOMAIN


def test_config_error_exit_names_key(capsys, tmp_path):
    data = yaml.safe_load(defaults_text())
    data["pump"]["bogus"] = 1
    bad = tmp_path / "bad.yaml"
    bad.write_text(yaml.safe_dump(data))
    code, _, err = run(capsys, "--config", str(bad), "shg", "period")
    assert code == EXIT_CONFIG and "pump.bogus" in err
    code, _, err = run(capsys, "--config", str(tmp_path / "missing.yaml"), "report")
    assert code == EXIT_CONFIG


def test_report_ok_and_deterministic(capsys):
    code, first, _ = run(capsys, "report")
    assert code == EXIT_OK
    _, second, _ = run(capsys, "report")
    assert first == second
    assert "provenance" in first and "fitted-default" in first


def test_report_deviation_exit(capsys, tmp_path):
    data = yaml.safe_load(defaults_text())
    data["shg_measured"]["shg_power_uw"] = 400.0
    cfg = tmp_path / "dev.yaml"
    cfg.write_text(yaml.safe_dump(data))
    code, out, _ = run(capsys, "--config", str(cfg), "report")
    assert code == EXIT_DEVIATION
    assert "FAIL" in out


def test_config_dump_roundtrip(capsys, tmp_path):
    code, out, _ = run(capsys, "config", "dump")
    p = tmp_path / "dump.yaml"
    p.write_text(out)
    code2, out2, _ = run(capsys, "--config", str(p), "config", "dump")
    assert code == code2 == EXIT_OK and out == out2


def test_console_entry_point_subprocess():
    res = subprocess.run([sys.executable, "-m", "photoion.cli", "ion", "field", "--n", "40"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and "V/cm" in res.stdout
