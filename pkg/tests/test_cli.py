import io
import subprocess
import sys

import pytest

from turbobec.cli import SimConfig, read_csv, run_command, simulate_fer, write_csv
from turbobec.pccc import format_code_spec, make_turbo_code, toy_spec

HAMMING_TSSEF = "1/4*X^3 + 3*X^4 + 27/2*X^5 + 38*X^6 + 265/4*X^7 + 45*X^8 + 10*X^9 + X^10"


def run(argv, capsys):
    code = run_command(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_uniform_prints_hamming_tssef(capsys):
    code, out, _ = run(["uniform", "--constituent", "hamming74", "--interleaver-length", "4"], capsys)
    assert code == 0
    assert out.strip() == HAMMING_TSSEF


def test_uniform_records_roundtrip(capsys):
    from turbobec.uniform import parse_enumfn

    code, out, _ = run(["uniform", "--constituent", "hamming74", "--show", "irtssef", "--format", "records"], capsys)
    assert code == 0
    f = parse_enumfn(out)
    assert f.total_size().to_string() == HAMMING_TSSEF


def test_check_stopset_codeword(capsys):
    c = make_turbo_code(toy_spec())
    word = c.codewords()[1]
    pos = ",".join(str(p) for p in range(c.N) if (word >> p) & 1)
    code, out, _ = run(["check-stopset", "--positions", pos], capsys)
    assert (code, out.strip()) == (0, "stopping set: yes (codeword)")
    code, out, _ = run(["check-stopset", "--positions", "0"], capsys)
    assert (code, out.strip()) == (0, "stopping set: no")


def test_enumerate_tau_zero(capsys):
    code, out, _ = run(["enumerate", "--tau", "0"], capsys)
    assert code == 0
    assert "count 0" in out and "\nset " not in out


def test_enumerate_brute_matches_gpb(capsys, tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    assert run_command(["enumerate", "--tau", "12", "-o", str(a)]) == 0
    assert run_command(["enumerate", "--tau", "12", "--method", "brute", "-o", str(b)]) == 0
    from turbobec.stopsets import parse_report

    sets_a = {s.positions for s in parse_report(a.read_text())[1]}
    sets_b = {s.positions for s in parse_report(b.read_text())[1]}
    assert sets_a == sets_b and len(sets_a) == 60


def test_encode_decode(capsys):
    code, out, _ = run(["encode", "--info", "10"], capsys)
    assert (code, out.strip()) == (0, "111111000001")
    code, out, _ = run(["decode", "--received", "1?1?1?00000?", "--decoder", "improved"], capsys)
    assert code == 0 and "status: recovered" in out and "estimate: 111111000001" in out


def test_usage_and_data_errors(capsys, tmp_path):
    assert run(["frobnicate"], capsys)[0] == 1
    assert run([], capsys)[0] == 1
    assert run(["encode", "--info", "101"], capsys)[0] == 2
    assert run(["decode", "--received", "1?"], capsys)[0] == 2
    bad = tmp_path / "bad.spec"
    bad.write_text("constituent = toy\nK = x\n")
    code, _, err = run(["encode", "--code", str(bad), "--info", "10"], capsys)
    assert code == 2 and f"{bad}:2:" in err
    assert run(["encode", "--code", str(tmp_path / "missing"), "--info", "10"], capsys)[0] == 2


def test_code_file_and_interleaver_file(capsys, tmp_path):
    spec = tmp_path / "toy.spec"
    spec.write_text(format_code_spec(toy_spec()))
    pi = tmp_path / "pi.txt"
    pi.write_text("0 1 3 2 5 4\n")
    code, out, _ = run(["encode", "--code", str(spec), "--interleaver", str(pi), "--info", "10"], capsys)
    assert code == 0 and len(out.strip()) == 12


def test_simulate_trivial_points(capsys):
    code, out, _ = run(["simulate", "--eps", "0,1", "--frames", "50"], capsys)
    assert code == 0
    recs = read_csv(io.StringIO(out))
    assert (recs[0].fer, recs[0].mean_iterations) == (0.0, 1.0)
    assert recs[1].fer == 1.0


def test_simulate_is_reproducible_and_thread_independent(tmp_path, monkeypatch):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["simulate", "--eps", "0.3,0.5", "--frames", "300", "--seed", "4"]
    assert run_command(args + ["-o", str(a)]) == 0
    monkeypatch.setenv("TURBOBEC_THREADS", "2")
    assert run_command(args + ["-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == "epsilon,frames,frame_errors,fer,mean_iterations,ambiguous,stderr"


def test_csv_roundtrip():
    code = make_turbo_code(toy_spec())
    recs = simulate_fer(SimConfig(code, [0.2, 0.6], frames=100, seed=1))
    buf = io.StringIO()
    write_csv(recs, buf)
    buf.seek(0)
    assert read_csv(buf) == recs


def test_improved_not_worse_than_basic_paired():
    code = make_turbo_code(toy_spec())
    eps = [0.3, 0.5, 0.7]
    basic = simulate_fer(SimConfig(code, eps, frames=2000, decoder="basic", seed=9))
    imp = simulate_fer(SimConfig(code, eps, frames=2000, decoder="improved", l_max=None, seed=9))
    assert all(i.frame_errors <= b.frame_errors for i, b in zip(imp, basic))


def test_sim_config_validation():
    code = make_turbo_code(toy_spec())
    with pytest.raises(ValueError):
        simulate_fer(SimConfig(code, [1.5]))
    with pytest.raises(ValueError):
        simulate_fer(SimConfig(code, [0.5], frames=0))


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "turbobec.cli", "uniform", "--constituent", "hamming74"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip() == HAMMING_TSSEF
