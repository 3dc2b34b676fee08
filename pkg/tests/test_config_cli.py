import subprocess
import sys

import numpy as np
import pytest

from darboux1d.cli import EXIT_CHECKS, EXIT_CONFIG, EXIT_OK, main
from darboux1d.config import load_config
from darboux1d.errors import ConfigError


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_config_unknown_key_rejected(tmp_path):
    cfg = _write(tmp_path, "c.toml", """
[potential]
kind = "zero"
bogus = 1

[task]
type = "spectrum"
e_min = 0.0
e_max = 1.0
""")
    with pytest.raises(ConfigError, match="potential.bogus"):
        load_config(cfg)


def test_config_missing_section(tmp_path):
    cfg = _write(tmp_path, "c.toml", "[potential]\nkind = 'zero'\n")
    with pytest.raises(ConfigError, match="task"):
        load_config(cfg)


def test_config_equal_alphas_rejected(tmp_path):
    cfg = _write(tmp_path, "c.toml", """
[potential]
kind = "chain"
base = { kind = "zero" }

[[potential.transform]]
alpha1 = 1.0
alpha2 = 1.0
u1 = { type = "eigenfunction", index = 2 }
u2 = { type = "explicit", value = [1.0, 0.0], derivative = [0.0, 0.0] }

[task]
type = "transform"
""")
    with pytest.raises(ConfigError, match="alpha1 = alpha2"):
        load_config(cfg)


def test_config_syntax_error_has_location(tmp_path):
    cfg = _write(tmp_path, "c.toml", "[potential\nkind=zero\n")
    with pytest.raises(ConfigError, match="line"):
        load_config(cfg)


SPEC_FREE = """
[potential]
kind = "zero"

[task]
type = "spectrum"
e_min = 0.0
e_max = 20.0
"""


def test_cli_spectrum_free(tmp_path):
    cfg = _write(tmp_path, "c.toml", SPEC_FREE)
    out = tmp_path / "out"
    assert main(["spectrum", "--config", cfg, "--out", str(out)]) == EXIT_OK
    table = (out / "spectrum.csv").read_text()
    assert table.startswith("# darboux1d spectrum table\n")
    assert "config_sha256" in table
    rows = [l for l in table.splitlines() if not l.startswith("#")]
    assert len(rows) == 8
    first = rows[0].split(",")
    assert abs(float(first[0]) - 0.25) < 1e-9
    assert first[2] == "1"
    # 17 significant digits in scientific notation
    assert "e" in first[0] and len(first[0].split("e")[0].split(".")[1]) == 17
    assert (out / "provenance.txt").exists()


def test_cli_empty_window(tmp_path):
    cfg = _write(tmp_path, "c.toml", """
[potential]
kind = "zero"

[task]
type = "spectrum"
e_min = 3.0
e_max = 3.0
""")
    out = tmp_path / "o"
    assert main(["spectrum", "--config", cfg, "--out", str(out)]) == EXIT_OK
    rows = [l for l in (out / "spectrum.csv").read_text().splitlines()
            if not l.startswith("#")]
    assert rows == []


def test_cli_determinism(tmp_path):
    cfg = _write(tmp_path, "c.toml", SPEC_FREE.replace("20.0", "5.0"))
    out1, out2 = tmp_path / "o1", tmp_path / "o2"
    assert main(["spectrum", "--config", cfg, "--out", str(out1)]) == EXIT_OK
    assert main(["spectrum", "--config", cfg, "--out", str(out2)]) == EXIT_OK
    assert (out1 / "spectrum.csv").read_bytes() == (out2 / "spectrum.csv").read_bytes()
    assert (out1 / "provenance.txt").read_bytes() == (out2 / "provenance.txt").read_bytes()


def test_cli_config_error_exit_code(tmp_path):
    cfg = _write(tmp_path, "c.toml", "[potential]\nkind = 'nonsense'\n[task]\ntype='spectrum'\ne_min=0.0\ne_max=1.0\n")
    assert main(["spectrum", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_CONFIG


def test_cli_task_command_mismatch(tmp_path):
    cfg = _write(tmp_path, "c.toml", SPEC_FREE)
    assert main(["diagnose", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_CONFIG


TRANSFORM_CHAIN = """
[potential]
kind = "chain"
base = { kind = "zero" }

[[potential.transform]]
alpha1 = 1.0
alpha2 = 4.0
u1 = { type = "eigenfunction", index = 2 }
u2 = { type = "combination", index = 4, c = 0.5641895835477563 }

[task]
type = "transform"
"""


def test_cli_transform_chain_matches_closed_form(tmp_path):
    cfg = _write(tmp_path, "c.toml", TRANSFORM_CHAIN)
    out = tmp_path / "o"
    assert main(["transform", "--config", cfg, "--out", str(out)]) == EXIT_OK
    rows = [l.split(",") for l in (out / "potential_0.csv").read_text().splitlines()
            if not l.startswith("#")]
    xs = np.array([float(r[0]) for r in rows])
    vv = np.array([float(r[1]) + 1j * float(r[2]) for r in rows])
    exact = 2 * (1 - 4) / (np.cos(xs) + 2j * np.sin(xs)) ** 2
    assert np.max(np.abs(vv - exact)) < 1e-7
    assert (out / "wronskian_0.csv").exists()
    summary = (out / "transform_summary.txt").read_text()
    assert "nodeless = True" in summary
    assert "intertwining residual" in summary


def test_cli_diagnose_double_level(tmp_path):
    cfg = _write(tmp_path, "c.toml", """
[potential]
kind = "pt-trig"
A = 1.0
B = 2.0

[task]
type = "diagnose"
level = 4.0
""")
    out = tmp_path / "o"
    assert main(["diagnose", "--config", cfg, "--out", str(out)]) == EXIT_OK
    body = (out / "jordan_report.txt").read_text()
    assert "algebraic multiplicity 2" in body
    assert (out / "chain_E4.000000_member1.csv").exists()


def test_cli_reproduce_forward(tmp_path):
    cfg = _write(tmp_path, "c.toml", """
[potential]
kind = "zero"

[task]
type = "reproduce"
scenario = "forward-Bgeneric"
B = 1.3
""")
    out = tmp_path / "o"
    assert main(["reproduce", "--config", cfg, "--out", str(out)]) == EXIT_OK
    assert "ALL PASSED" in (out / "scenario_report.txt").read_text()


def test_cli_reproduce_backward_reports_failure(tmp_path):
    # the stated-set spectrum clause cannot hold for the endpoint-singular
    # potential; reproduce reports it and exits with the check-failure code
    cfg = _write(tmp_path, "c.toml", """
[potential]
kind = "pt-trig"
A = 1.0
B = 2.0

[task]
type = "reproduce"
scenario = "backward-V2"
kappa = 1.2
""")
    out = tmp_path / "o"
    assert main(["reproduce", "--config", cfg, "--out", str(out)]) == EXIT_CHECKS
    report = (out / "scenario_report.txt").read_text()
    assert "[FAIL] spectrum over [0,7] equals stated set" in report
    assert "[PASS] multiplicity at 4 drops" in report


def test_cli_reproduce_unknown_scenario(tmp_path):
    cfg = _write(tmp_path, "c.toml", """
[potential]
kind = "zero"

[task]
type = "reproduce"
scenario = "nope"
""")
    assert main(["reproduce", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_CONFIG


def test_cli_entry_point_runs():
    proc = subprocess.run([sys.executable, "-m", "darboux1d.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "spectrum" in proc.stdout


def test_line_endings_are_lf(tmp_path):
    cfg = _write(tmp_path, "c.toml", SPEC_FREE.replace("20.0", "1.5"))
    out = tmp_path / "o"
    main(["spectrum", "--config", cfg, "--out", str(out)])
    raw = (out / "spectrum.csv").read_bytes()
    assert b"\r" not in raw


def test_cli_diagnose_rect(tmp_path):
    cfg = _write(tmp_path, "c.toml", """
[potential]
kind = "zero"

[task]
type = "diagnose"
rect = [0.1, 2.5, -0.5, 0.5]
""")
    out = tmp_path / "o"
    assert main(["diagnose", "--config", cfg, "--out", str(out)]) == EXIT_OK
    body = (out / "jordan_report.txt").read_text()
    assert "diagonalizable over rect: True" in body
    assert body.count("algebraic multiplicity 1") == 3  # 0.25, 1, 2.25


def test_cli_tabulated_potential(tmp_path):
    import numpy as np

    n = 501
    xs = np.linspace(-np.pi, np.pi, n)
    rows = np.column_stack([xs, np.zeros(n), np.zeros(n)])
    table = tmp_path / "v.csv"
    np.savetxt(table, rows, delimiter=",")
    cfg = _write(tmp_path, "c.toml", f"""
[potential]
kind = "table"
path = "{table}"

[interval]
n_nodes = {n}

[task]
type = "spectrum"
e_min = 0.0
e_max = 2.0
""")
    out = tmp_path / "o"
    assert main(["spectrum", "--config", cfg, "--out", str(out)]) == EXIT_OK
    rows = [l.split(",") for l in (out / "spectrum.csv").read_text().splitlines()
            if not l.startswith("#")]
    assert abs(float(rows[0][0]) - 0.25) < 1e-8
    assert abs(float(rows[1][0]) - 1.0) < 1e-8


def test_cli_grid_and_tolerance_overrides(tmp_path):
    cfg = _write(tmp_path, "c.toml", SPEC_FREE.replace("20.0", "1.5"))
    out = tmp_path / "o"
    rc = main(["spectrum", "--config", cfg, "--out", str(out),
               "--grid", "801", "--tol-ode", "1e-9"])
    assert rc == EXIT_OK
    prov = (out / "provenance.txt").read_text()
    assert "n_nodes = 801" in prov
    rtol_line = [l for l in prov.splitlines() if l.startswith("tolerances.ode_rtol")][0]
    assert float(rtol_line.split("=")[1]) == 1e-9


def test_cli_reproduce_chain_dim3(tmp_path):
    cfg = _write(tmp_path, "c.toml", """
[potential]
kind = "pt-trig"
A = 1.0
B = 2.0

[task]
type = "reproduce"
scenario = "chain-dim3"
""")
    out = tmp_path / "o"
    assert main(["reproduce", "--config", cfg, "--out", str(out)]) == EXIT_OK
    assert "ALL PASSED" in (out / "scenario_report.txt").read_text()


def test_cli_spectrum_rect_shows_multiplicity(tmp_path):
    cfg = _write(tmp_path, "c.toml", """
[potential]
kind = "pt-trig"
A = 1.0
B = 2.0

[task]
type = "spectrum"
rect = [0.1, 7.0, -1.0, 1.0]
""")
    out = tmp_path / "o"
    assert main(["spectrum", "--config", cfg, "--out", str(out)]) == EXIT_OK
    rows = [l.split(",") for l in (out / "spectrum.csv").read_text().splitlines()
            if not l.startswith("#")]
    by_e = {round(float(r[0]), 6): int(r[2]) for r in rows}
    assert by_e[4.0] == 2
    assert by_e[0.25] == 1


def test_cli_two_step_chain(tmp_path):
    cfg = _write(tmp_path, "c.toml", """
[potential]
kind = "chain"
base = { kind = "zero" }

[[potential.transform]]
alpha1 = 1.0
u1 = { type = "eigenfunction", index = 2 }
alpha2 = 4.0
u2 = { type = "combination", index = 4, c = 0.5641895835477563 }

[[potential.transform]]
alpha1 = 4.0
u1 = { type = "eigenfunction", energy = 4.0 }
alpha2 = 1.44
u2 = { type = "explicit", value = [0.0, 0.0], derivative = [1.0, 0.0] }

[task]
type = "transform"
""")
    out = tmp_path / "o"
    assert main(["transform", "--config", cfg, "--out", str(out)]) == EXIT_OK
    # both the intermediate and the final potential are emitted
    assert (out / "potential_0.csv").exists()
    assert (out / "potential_1.csv").exists()
    summary = (out / "transform_summary.txt").read_text()
    assert "step 1" in summary and "singular_left = True" in summary


def test_cli_reproduce_rejects_kappa_outside_window(tmp_path):
    cfg = _write(tmp_path, "c.toml", """
[potential]
kind = "pt-trig"
A = 1.0
B = 2.0

[task]
type = "reproduce"
scenario = "backward-V2"
kappa = 0.4
""")
    assert main(["reproduce", "--config", cfg, "--out", str(tmp_path / "o")]) == EXIT_CONFIG
