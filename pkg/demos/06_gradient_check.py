"""Finite-difference verification of every gate's analytic gradient.

Runs the exhaustive central-difference check on all four architectures and
prints the worst relative error per parameter block.
"""

from seqrec.gradcheck import gradient_check
from seqrec.network import NetworkConfig

configs = {
    "lstm": NetworkConfig(catalog_size=8, hidden_size=6, cell_kind="lstm"),
    "gru": NetworkConfig(catalog_size=8, hidden_size=6, cell_kind="gru"),
    "2-layer lstm": NetworkConfig(catalog_size=8, hidden_size=6, cell_kind="lstm", layers=2),
    "bidirectional lstm": NetworkConfig(catalog_size=8, hidden_size=6,
                                        cell_kind="lstm", bidirectional=True),
}

for name, cfg in configs.items():
    report = gradient_check(cfg, seed=1, tolerance=1e-4)
    status = "ok" if report.passed else "FAILED: " + ", ".join(report.failing_blocks())
    print(f"\n{name}: {status}")
    for block, err in sorted(report.block_errors.items()):
        print(f"  {block:<16} max rel err {err:.2e}")
