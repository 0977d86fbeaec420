import csv
import json
import subprocess
import sys

import pytest

from fdsis import load_channel
from fdsis.cli import main, parse_args


@pytest.fixture(scope="module")
def small_channel(tmp_path_factory):
    path = tmp_path_factory.mktemp("ch") / "small.sich"
    main(["gen-channel", "--out", str(path), "--tx", "4x4", "--rx", "4x4",
          "--n-freqs", "201", "--f-start-hz", "3.4e9", "--f-stop-hz", "3.6e9"])
    return path


def test_gen_channel_binary_and_csv(small_channel, tmp_path):
    ch = load_channel(small_channel)
    assert ch.shape == (16, 16, 201)
    out = tmp_path / "c.csv"
    assert main(["gen-channel", "--out", str(out), "--tx", "2x2", "--rx", "2x2", "--n-freqs", "5"]) == 0
    assert load_channel(out).shape == (4, 4, 5)


def test_inspect_channel_reports_band(small_channel, capsys):
    main(["inspect-channel", str(small_channel), "--band-center-hz", "3.5e9", "--band-width-hz", "20e6"])
    info = json.loads(capsys.readouterr().out)
    assert info["band"]["points"] == 21


def test_solve_prints_all_schemes(small_channel, tmp_path, capsys):
    out = tmp_path / "solve.csv"
    rc = main(["solve", "--channel", str(small_channel), "--full-array", "4x4", "--subarray", "2x2",
               "--psi-d", "30", "--psi-u", "120", "--iterations", "10", "--particles", "6", "--out", str(out)])
    assert rc == 0
    text = capsys.readouterr().out
    for kind in ("MD", "CM", "NCM"):
        assert kind in text
    rows = list(csv.reader(out.open()))
    assert len(rows) == 1 + 3 + 9


def test_sweep_to_stdout(capsys):
    main(["sweep", "--psi-d", "0:90:180", "--psi-u", "90", "--schemes", "MD,NCM",
          "--iterations", "5", "--particles", "4", "--workers", "1"])
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert rows[0][0] == "psi_d_deg"
    assert len(rows) == 1 + 3 * 2 + 6
    levels = {(r[0], r[4]): float(r[5]) for r in rows[1:7]}
    for psi in ("0.0", "90.0", "180.0"):
        assert levels[(psi, "NCM")] <= levels[(psi, "MD")]


def test_sweep_rejects_three_varying_axes():
    with pytest.raises(SystemExit):
        main(["sweep", "--psi-d", "0:90:180", "--psi-u", "0:90:180", "--theta-d", "0:45:90",
              "--iterations", "1", "--workers", "1"])


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[fdsis]\nparticles = 7\nseed = 3\n\n[sweep]\nparticles = 9\ngrid = elevation\n")
    args = parse_args(["--config", str(cfg), "sweep"])
    assert (args.particles, args.seed, args.grid) == (9, 3, "elevation")
    args = parse_args(["--config", str(cfg), "sweep", "--particles", "11"])
    assert args.particles == 11
    args = parse_args(["--config", str(cfg), "solve"])
    assert args.particles == 7


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[solve]\nnot_a_flag = 1\n")
    with pytest.raises(SystemExit):
        parse_args(["--config", str(cfg), "solve"])


def test_shared_section_skips_flags_a_subcommand_lacks(tmp_path):
    cfg = tmp_path / "shared.ini"
    cfg.write_text("[fdsis]\nsubarray = 4x4\nseed = 3\n")
    assert parse_args(["--config", str(cfg), "gen-channel", "--out", "x.sich"]).tx == "8x8"
    assert parse_args(["--config", str(cfg), "solve"]).subarray == "4x4"


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "fdsis", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "gen-channel" in r.stdout
