"""
Side-by-side comparison of two run reports (A against baseline B)
"""

from typing import Dict, Optional

from ..coordinator.models import RunReport


def _side(a: Optional[float], b: Optional[float], relative: bool = False) -> Dict[str, Optional[float]]:
    entry: Dict[str, Optional[float]] = {"a": a, "b": b, "difference": None}
    if a is not None and b is not None:
        entry["difference"] = a - b
    if relative:
        pct = None
        if a is not None and b is not None:
            if b != 0:
                pct = 100.0 * (a - b) / abs(b)
            elif a == b:
                pct = 0.0
        entry["relative_pct"] = pct
    return entry


def compare_reports(a: RunReport, b: RunReport) -> dict:
    """Per-metric net-delta differences (relative to B), utilization, makespan and counts"""
    metrics = sorted(set(a.net_deltas) | set(b.net_deltas))
    return {
        "net_deltas": {
            m: _side(a.net_deltas.get(m), b.net_deltas.get(m), relative=True) for m in metrics
        },
        "final_composite_median": _side(a.final_composite_median, b.final_composite_median, relative=True),
        "final_plddt_half_std": _side(a.final_plddt_half_std, b.final_plddt_half_std),
        "utilization": {
            "cpu_pct": _side(a.utilization.cpu_pct, b.utilization.cpu_pct),
            "gpu_pct": _side(a.utilization.gpu_pct, b.utilization.gpu_pct),
        },
        "makespan": {
            phase: _side(getattr(a.makespan, phase), getattr(b.makespan, phase))
            for phase in ("bootstrap", "exec_setup", "running", "total")
        },
        "counts": {
            name: _side(getattr(a.counts, name), getattr(b.counts, name))
            for name in ("pipelines", "subpipelines", "lanes", "trajectories", "retries")
        },
    }
