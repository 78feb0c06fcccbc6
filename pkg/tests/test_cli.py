import json

import numpy as np
import pytest

from hyperstruc import graph as gr
from hyperstruc.cli import DEFAULTS, build_parser, main, resolve
from hyperstruc.trainer import read_embedding

FAST = ["--epochs", "1", "--walks", "2", "--walk-length", "6", "--threads", "1"]


@pytest.fixture(scope="module")
def barbell_files(tmp_path_factory):
    d = tmp_path_factory.mktemp("barbell")
    assert main(["generate", "barbell", "--out", str(d / "bb")]) == 0
    return d / "bb.edgelist", d / "bb.labels"


@pytest.fixture(scope="module")
def barbell_embedding(barbell_files, tmp_path_factory):
    out = tmp_path_factory.mktemp("emb") / "bb.emb"
    assert main(["embed", "--edgelist", str(barbell_files[0]), "--out", str(out), "--dim", "2", "--seed", "7", *FAST]) == 0
    return out


def test_generate_barbell(barbell_files):
    g = gr.read_edge_list_file(barbell_files[0])
    assert (g.node_count, g.edge_count) == (30, 2 * 45 + 11)
    with open(barbell_files[1], encoding="utf-8") as f:
        roles = gr.load_labels(f, g)
    assert len(roles) == 30 and max(roles.values()) == 6


def test_generate_mirror(tmp_path, capsys):
    assert main(["generate", "mirror", "--out", str(tmp_path / "km")]) == 0
    g = gr.read_edge_list_file(tmp_path / "km.edgelist")
    assert (g.node_count, g.edge_count) == (68, 2 * 78 + 1)
    pairs = (tmp_path / "km.mirror").read_text().split("\n")
    assert pairs[0] == "1 37" and len([p for p in pairs if p]) == 34
    assert capsys.readouterr().err == ""


def test_generate_mirror_custom_bridge(tmp_path, barbell_files):
    assert main(["generate", "mirror", "--edgelist", str(barbell_files[0]), "--bridge", "0:29",
                 "--out", str(tmp_path / "m")]) == 0
    g = gr.read_edge_list_file(tmp_path / "m.edgelist")
    assert g.node_count == 60 and g.edge_count == 2 * 101 + 1


def test_generate_mirror_unknown_bridge(tmp_path, capsys):
    assert main(["generate", "mirror", "--bridge", "999", "--out", str(tmp_path / "x")]) == 1
    assert "999" in capsys.readouterr().err


def test_embed_output_shape(barbell_embedding):
    with open(barbell_embedding, encoding="utf-8") as f:
        tokens, emb = read_embedding(f)
    assert len(tokens) == 30 and emb.shape == (30, 3)
    inner = (emb[:, :-1] ** 2).sum(1) - emb[:, -1] ** 2
    assert np.allclose(inner, -1, atol=1e-9)


def test_embed_deterministic(barbell_files, barbell_embedding, tmp_path):
    again = tmp_path / "again.emb"
    assert main(["embed", "--edgelist", str(barbell_files[0]), "--out", str(again), "--dim", "2", "--seed", "7", *FAST]) == 0
    assert again.read_bytes() == barbell_embedding.read_bytes()


def test_embed_seed_changes_output(barbell_files, barbell_embedding, tmp_path):
    other = tmp_path / "other.emb"
    assert main(["embed", "--edgelist", str(barbell_files[0]), "--out", str(other), "--dim", "2", "--seed", "8", *FAST]) == 0
    assert other.read_bytes() != barbell_embedding.read_bytes()


def test_embed_cache_and_corpus(barbell_files, tmp_path, barbell_embedding):
    out = tmp_path / "c.emb"
    args = ["embed", "--edgelist", str(barbell_files[0]), "--out", str(out), "--dim", "2", "--seed", "7",
            "--cache-dir", str(tmp_path / "cache"), "--corpus-out", str(tmp_path / "walks.txt"), *FAST]
    assert main(args) == 0
    assert len(list((tmp_path / "cache").glob("structdist-*.npy"))) == 1
    assert main(args) == 0
    assert out.read_bytes() == barbell_embedding.read_bytes()
    walks = (tmp_path / "walks.txt").read_text().splitlines()
    assert len(walks) == 2 * 30 and all(len(w.split()) == 6 for w in walks)


def test_embed_missing_input(tmp_path, capsys):
    assert main(["embed", "--edgelist", str(tmp_path / "nope"), "--out", str(tmp_path / "e")]) == 1
    err = capsys.readouterr().err
    assert "not found" in err and len(err.strip().splitlines()) == 1


def test_embed_bad_edge_list(tmp_path, capsys):
    bad = tmp_path / "bad.edgelist"
    bad.write_text("1 2 3 4\n")
    assert main(["embed", "--edgelist", str(bad), "--out", str(tmp_path / "e")]) == 1
    assert "error" in capsys.readouterr().err


def test_project_two_dimensional(barbell_embedding, barbell_files, tmp_path):
    out = tmp_path / "disk"
    assert main(["project", "--embedding", str(barbell_embedding), "--labels", str(barbell_files[1]),
                 "--out", str(out)]) == 0
    rows = [line.split("\t") for line in (tmp_path / "disk.tsv").read_text().splitlines()]
    pts = np.array([[float(a), float(b)] for _, a, b in rows])
    assert len(rows) == 30 and (np.hypot(*pts.T) < 1).all()
    svg = (tmp_path / "disk.svg").read_text()
    assert svg.count("<use") == 30 and 'id="boundary' in svg
    first = (tmp_path / "disk.svg").read_bytes()
    assert main(["project", "--embedding", str(barbell_embedding), "--labels", str(barbell_files[1]),
                 "--out", str(out)]) == 0
    assert (tmp_path / "disk.svg").read_bytes() == first


def test_project_origin_maps_to_centre(tmp_path):
    emb = tmp_path / "o.emb"
    emb.write_text("#dim 2\na\t0.0\t0.0\t1.0\nb\t0.6\t0.8\t1.4142135623730951\n")
    assert main(["project", "--embedding", str(emb), "--out", str(tmp_path / "p"), "--format", "png"]) == 0
    rows = (tmp_path / "p.tsv").read_text().splitlines()
    assert rows[0] == "a\t0.0\t0.0"
    x, y = map(float, rows[1].split("\t")[1:])
    assert np.hypot(x, y) == pytest.approx(1 / (1 + np.sqrt(2)))
    assert (tmp_path / "p.png").stat().st_size > 0


def test_project_high_dimension_skips_figure(tmp_path, capsys):
    emb = tmp_path / "h.emb"
    emb.write_text("#dim 3\na\t0.0\t0.0\t0.0\t1.0\n")
    assert main(["project", "--embedding", str(emb), "--out", str(tmp_path / "h")]) == 0
    assert "skipped" in capsys.readouterr().out
    assert (tmp_path / "h.tsv").exists() and not (tmp_path / "h.svg").exists()


def test_classify_reports(barbell_embedding, barbell_files, tmp_path):
    # barbell roles have 2 to 20 members; three folds keep every class large enough
    labels = tmp_path / "coarse.labels"
    labels.write_text("".join(f"{i} {0 if i in range(9) or i in range(21, 30) else 1}\n" for i in range(30)))
    out = tmp_path / "rep"
    args = ["classify", "--embedding", str(barbell_embedding), "--labels", str(labels), "--out", str(out),
            "--folds", "3", "--k", "3", "--dataset", "brazil"]
    assert main(args) == 0
    tsv = (tmp_path / "rep.tsv").read_text()
    assert "micro_f1" in tsv and "reference_hyperboloid\t0.78" in tsv
    text = (tmp_path / "rep.txt").read_text()
    assert "micro-F1" in text
    assert main(args) == 0
    assert (tmp_path / "rep.tsv").read_text() == tsv


def test_classify_from_edge_list(barbell_files, tmp_path):
    labels = tmp_path / "coarse.labels"
    labels.write_text("".join(f"{i} {i % 2}\n" for i in range(30)))
    assert main(["classify", "--edgelist", str(barbell_files[0]), "--labels", str(labels),
                 "--out", str(tmp_path / "r"), "--folds", "2", "--dim", "2", *FAST]) == 0
    assert (tmp_path / "r.txt").exists()


def test_classify_label_mismatch(barbell_embedding, tmp_path, capsys):
    labels = tmp_path / "x.labels"
    labels.write_text("nobody 0\n")
    assert main(["classify", "--embedding", str(barbell_embedding), "--labels", str(labels),
                 "--out", str(tmp_path / "r")]) == 1
    assert "mismatch" in capsys.readouterr().err


def test_config_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"dim": 4, "alpha": 0.5}))
    args = build_parser().parse_args(["embed", "--edgelist", "x", "--out", "y", "--config", str(cfg), "--dim", "3"])
    resolved = resolve(args)
    assert resolved["dim"] == 3 and resolved["alpha"] == 0.5
    assert resolved["negatives"] == DEFAULTS["negatives"]


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"dimension": 4}))
    assert main(["embed", "--edgelist", "x", "--out", "y", "--config", str(cfg)]) == 1
    assert "dimension" in capsys.readouterr().err
