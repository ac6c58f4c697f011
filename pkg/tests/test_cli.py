import numpy as np
import pytest

from curvelrc import codes, constructions as K, locality
from curvelrc.cli import main, sidecar_path

TB = 'construction = "tb"\nq = 27\nkind = "trace"\nr = 8\nk_prime = 10\n'
FACTOR = '[[factors]]\nconstruction = "tb"\nq = 16\nkind = "subspace"\nr = 3\nk = 2\nn_parts = 2\n'
PROD = 'construction = "product"\n' + FACTOR + FACTOR
FIBER = 'construction = "suzuki_fiber"\nq = 8\nalpha = 1\n'


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def built(tmp_path, text, name="c"):
    cfg = write(tmp_path, name + ".toml", text)
    out = str(tmp_path / (name + ".lrcc"))
    assert main(["build", "--config", cfg, "--out", out]) == 0
    return out


def test_build_tb(tmp_path, capsys):
    out = built(tmp_path, TB)
    text = capsys.readouterr().out
    assert "n: 27" in text and "k: 9" in text and "d_designed: 18" in text
    C = codes.load(out)
    assert (C.n, C.k) == (27, 9)
    assert sidecar_path(out).exists()


def test_build_product(tmp_path, capsys):
    out = built(tmp_path, PROD)
    assert "d_designed: 49" in capsys.readouterr().out
    assert main(["distance", "--in", out, "--method", "exhaustive"]) == 0
    assert "d: 49" in capsys.readouterr().out


def test_roundtrip_byte_identical(tmp_path):
    out = built(tmp_path, TB)
    b = K.tb(27, "trace", 8, k_prime=10)
    data = open(out, "rb").read()
    assert data == codes.dumps(b.code)
    assert codes.dumps(codes.load(out)) == data
    assert sidecar_path(out).read_bytes() == locality.dumps_structure(b.structure, b.code.field)
    again = built(tmp_path, TB, "d")
    assert open(again, "rb").read() == data


def test_certify_fiber(tmp_path, capsys):
    out = built(tmp_path, FIBER)
    capsys.readouterr()
    assert main(["certify", "--in", out]) == 0
    text = capsys.readouterr().out
    assert "localities: {4, 7}" in text
    assert "availability 2" in text
    assert "all certified" in text


def test_certify_repetition_without_sidecar(tmp_path, capsys):
    from curvelrc.gf import gf
    C = codes.from_generator(gf(16), np.ones((1, 5), dtype=np.int64))
    path = tmp_path / "rep.lrcc"
    codes.save(C, path)
    assert main(["certify", "--in", str(path)]) == 0
    assert "localities: {1}" in capsys.readouterr().out


def test_certify_overlap_fails(tmp_path, capsys):
    out = built(tmp_path, TB)
    b = K.tb(27, "trace", 8, k_prime=10)
    sets = [list(per) for per in b.structure.sets]
    s = sets[0][0]
    sets[0].append(locality.RecoverySet(0, s.positions.copy(), s.coeffs.copy()))
    bad = locality.RecoveryStructure(27, sets)
    sidecar_path(out).write_bytes(locality.dumps_structure(bad, b.code.field))
    capsys.readouterr()
    assert main(["certify", "--in", out]) == 3
    assert "disjointness failures: 1" in capsys.readouterr().out


def test_certify_wrong_weight_fails(tmp_path, capsys):
    out = built(tmp_path, TB)
    b = K.tb(27, "trace", 8, k_prime=10)
    s = b.structure.sets[4][0]
    s.coeffs[0] = b.code.field.add(int(s.coeffs[0]), 1)
    sidecar_path(out).write_bytes(locality.dumps_structure(b.structure, b.code.field))
    assert main(["certify", "--in", out]) == 3
    assert main(["repair", "--in", out, "--trials", "300"]) == 3


def test_repair_patterns(tmp_path, capsys):
    out = built(tmp_path, FIBER)
    capsys.readouterr()
    assert main(["repair", "--in", out, "--trials", "200"]) == 0
    text = capsys.readouterr().out
    assert "repaired: 200/200 (100.0%)" in text
    assert "symbols read: 4:" in text
    assert main(["repair", "--in", out, "--trials", "100", "--pattern", "set"]) == 0
    text = capsys.readouterr().out
    assert "repaired: 100/100" in text and "symbols read: 7:100" in text
    assert main(["repair", "--in", out, "--trials", "20", "--pattern", "all-sets"]) == 0
    assert "unrecoverable (every set erased): 20" in capsys.readouterr().out


def test_seed_determinism(tmp_path, capsys):
    out = built(tmp_path, TB)
    runs = []
    for seed in (5, 5, 6):
        capsys.readouterr()
        main(["distance", "--in", out, "--method", "random", "--trials", "2", "--seed", str(seed)])
        main(["repair", "--in", out, "--trials", "50", "--seed", str(seed)])
        runs.append(capsys.readouterr().out)
    assert runs[0] == runs[1]
    assert "d <= 18" in runs[0]


def test_params(tmp_path, capsys):
    cfg = write(tmp_path, "p.toml", 'construction = "suzuki_tilde"\nq = 8\nalpha = 1\n')
    assert main(["params", "--config", cfg]) == 0
    text = capsys.readouterr().out
    assert "n: 29120" in text and "k: 208" in text and "d_designed: 28603" in text
    cfg = write(tmp_path, "r.toml", 'construction = "params_only"\nwhich = "prop1"\nq = 27\nellG = 1\n')
    assert main(["params", "--config", cfg]) == 0
    assert "k: 18" in capsys.readouterr().out


def test_table_products(tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert main(["table", "--family", "products", "--compare", "--budget", str(2**20), "--trials", "1",
                 "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("construction,n,k,")
    assert any(",64,16," in ln and "match" in ln for ln in lines)


def test_exit_codes(tmp_path, capsys):
    assert main([]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1
    assert main(["build", "--config", write(tmp_path, "x.toml", TB)]) == 1
    assert main(["certify", "--in", str(tmp_path / "missing.lrcc")]) == 1
    assert main(["build", "--config", write(tmp_path, "bad.toml", 'construction = "nope"\n'),
                 "--out", str(tmp_path / "o")]) == 2
    assert main(["build", "--config", write(tmp_path, "bq.toml", 'construction = "tb"\nq = 27\nr = 5\n'),
                 "--out", str(tmp_path / "o")]) == 2
    assert main(["build", "--config", write(tmp_path, "nok.toml", 'q = 8\n'), "--out", str(tmp_path / "o")]) == 1
    assert "ConstructionError" in capsys.readouterr().err


def test_corrupt_file_exits_2(tmp_path, capsys):
    out = built(tmp_path, TB)
    data = open(out, "rb").read()
    open(out, "wb").write(data[:-3])
    assert main(["certify", "--in", out]) == 2
    assert "FormatError" in capsys.readouterr().err
    out = built(tmp_path, TB, "e")
    sidecar_path(out).write_bytes(b"LRCR\x07junk")
    assert main(["certify", "--in", out]) == 2
