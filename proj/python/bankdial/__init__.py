"""Synthetic banking dialogue corpora, memory-network training and evaluation.

Thin wrapper around the compiled ``_bankdial`` extension. Typical use::

    import bankdial

    cfg = bankdial.default_config()
    cfg.update(master_seed=7, out_dir="/tmp/run7", train_per_intent=5,
               dev_per_intent=2, test_per_intent=2, challenge_per_intent=2)
    bankdial.generate(cfg)
    bankdial.train(cfg, "smn")
    result = bankdial.evaluate(cfg, "smn")
    print(bankdial.render_report({"smn": result["accuracy_pct"]}))
"""

try:  # packaged layout: the extension sits inside this package
    from ._bankdial import (
        default_config,
        evaluate,
        generate,
        render_report,
        testset_tags,
        train,
        trend_violations,
    )
except ImportError:  # build-tree layout: extension on sys.path as a top-level module
    from _bankdial import (
        default_config,
        evaluate,
        generate,
        render_report,
        testset_tags,
        train,
        trend_violations,
    )

__all__ = [
    "default_config",
    "evaluate",
    "generate",
    "render_report",
    "testset_tags",
    "train",
    "trend_violations",
]
