"""End-to-end smoke test of the Python bindings on a tiny run."""

import json
import os

import pytest

bankdial = pytest.importorskip("bankdial")


@pytest.fixture(scope="module")
def tiny_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    cfg = bankdial.default_config()
    cfg.update(
        master_seed=7,
        out_dir=str(out),
        train_per_intent=4,
        dev_per_intent=2,
        test_per_intent=2,
        challenge_per_intent=2,
        model={"embedding_dim": 16, "max_epochs": 3},
    )
    # template path is relative to the repository root
    repo_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
    cfg["templates_path"] = os.path.join(repo_root, cfg["templates_path"])
    result = bankdial.generate(cfg)
    return cfg, result


def test_generate_writes_all_corpora(tiny_run):
    cfg, result = tiny_run
    assert os.path.exists(result["manifest_path"])
    assert os.path.exists(result["candidates_path"])
    assert set(result["counts"]) == set(bankdial.testset_tags())
    assert result["counts"]["train"] == 4 * 6

    with open(result["candidates_by_intent_path"]) as f:
        by_intent = json.load(f)
    assert set(by_intent) == {
        "transfer", "cancel_transfer", "block_card", "transaction_history", "balance", "limit",
    }


def test_generation_is_deterministic(tiny_run, tmp_path):
    cfg, result = tiny_run
    cfg2 = dict(cfg, out_dir=str(tmp_path))
    result2 = bankdial.generate(cfg2)
    with open(result["candidates_path"]) as a, open(result2["candidates_path"]) as b:
        assert a.read() == b.read()


def test_train_and_evaluate(tiny_run):
    cfg, _ = tiny_run
    trained = bankdial.train(cfg, "smn")
    assert os.path.exists(trained["checkpoint_path"])
    assert len(trained["log"]) == 3

    result = bankdial.evaluate(cfg, "smn", testsets=["test_it", "turn_compression_it"])
    acc = result["accuracy_pct"]
    assert set(acc) == {"test_it", "turn_compression_it"}
    assert all(0.0 <= v <= 100.0 for v in acc.values())
    assert os.path.exists(result["report_path"])
    assert os.path.exists(result["predictions_path"])

    table = bankdial.render_report({"smn": acc})
    assert "Non OOP" in table

    violations = bankdial.trend_violations({"smn": acc})
    assert isinstance(violations, list)


def test_bad_config_raises():
    cfg = bankdial.default_config()
    cfg["no_such_key"] = 1
    with pytest.raises(Exception, match="unknown config key"):
        bankdial.generate(cfg)
