"""CSV, JSON and SVG output for allocations, sweeps and oracle reports.

All writers are deterministic: the same input produces the same bytes.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from xml.sax.saxutils import escape

from .allocators import Allocation, build_allocation
from .model import Scenario, Strategy
from .network import NetworkSolution, SweepResult
from .oracle import OracleReport

CSV_COLUMNS = (
    "budget",
    "mode",
    "relay_id",
    "user_id",
    "power",
    "user_capacity_bits",
    "class_or_strategy",
    "sum_capacity_bits",
)
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf")


def _g(x: float) -> str:
    return f"{x:.12g}"


def _finite(x):
    return x if isinstance(x, (int, str)) or (x is not None and math.isfinite(x)) else None


def _as_solution(result) -> NetworkSolution:
    if isinstance(result, Allocation):
        mode = result.strategy.value.lower() if result.strategy else "hybrid"
        return NetworkSolution(mode, {result.relay_id: result})
    return result


# -- dict views -------------------------------------------------------------


def allocation_to_dict(alloc: Allocation) -> dict:
    return {
        "relay_id": alloc.relay_id,
        "strategy": alloc.strategy.value if alloc.strategy else None,
        "budget": alloc.budget,
        "prefactor": alloc.prefactor,
        "water_level": alloc.water_level,
        "slack": alloc.slack,
        "sum_capacity_bits": alloc.sum_capacity,
        "users": [
            {
                "id": uid,
                "power": alloc.powers[uid],
                "user_capacity_bits": alloc.user_capacity[uid],
                "class": alloc.classes[uid].value,
                "strategy": Strategy(alloc.user_strategy[uid]).value,
            }
            for uid in alloc.powers
        ],
    }


def _sorted_ids(ids):
    return sorted(ids, key=lambda i: (isinstance(i, str), str(i) if isinstance(i, str) else i))


def solution_to_dict(sol: NetworkSolution) -> dict:
    out = {
        "mode": sol.mode,
        "budget": sol.budget,
        "sum_capacity_bits": sol.sum_capacity,
        "relays": [allocation_to_dict(a) for a in sol.allocations.values()],
    }
    if sol.hybrid:
        out["hybrid"] = [
            {
                "relay_id": rid,
                "ndf_set": _sorted_ids(res.partition.ndf_set),
                "cf_set": _sorted_ids(res.partition.cf_set),
                "cf_strict": _sorted_ids(res.cf_strict),
                "ndf_strict": _sorted_ids(res.ndf_strict),
                "trace": [
                    {
                        "step": s.step,
                        "user": s.user,
                        "accepted": s.accepted,
                        "sum_capacity_bits": _finite(s.sum_capacity),
                        "cf_set": _sorted_ids(s.partition.cf_set),
                    }
                    for s in res.trace
                ],
            }
            for rid, res in sol.hybrid.items()
        ]
    return out


def sweep_to_dict(result: SweepResult) -> dict:
    return {
        "scenario": result.scenario_name,
        "fingerprint": result.fingerprint,
        "spacing": result.spacing,
        "budgets": result.budgets,
        "modes": result.modes,
        "series": {m: [solution_to_dict(s) for s in result.series[m]] for m in result.modes},
    }


def report_to_dict(report: OracleReport) -> dict:
    return {
        "best_powers": report.best_powers,
        "best_sum_capacity_bits": report.best_sum_capacity,
        "grid_sum_capacity_bits": _finite(report.grid_sum_capacity),
        "grid_resolution": report.grid_resolution,
        "refined": report.refined,
        "kkt_violations": [{"user": u, "description": d} for u, d in report.kkt_violations],
    }


def to_dict(result) -> dict:
    if isinstance(result, SweepResult):
        return sweep_to_dict(result)
    if isinstance(result, OracleReport):
        return report_to_dict(result)
    return solution_to_dict(_as_solution(result))


# -- CSV --------------------------------------------------------------------


def solution_rows(sol: NetworkSolution):
    total = sol.sum_capacity
    for alloc in sol.allocations.values():
        budget = alloc.budget if sol.budget is None else sol.budget
        for uid, power in alloc.powers.items():
            label = f"{Strategy(alloc.user_strategy[uid]).value}:{alloc.classes[uid].value}"
            yield (
                _g(budget),
                sol.mode,
                str(alloc.relay_id),
                str(uid),
                _g(power),
                _g(alloc.user_capacity[uid]),
                label,
                _g(total),
            )


def csv_text(result) -> str:
    if isinstance(result, OracleReport):
        raise ValueError("oracle reports are written as JSON only")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    if isinstance(result, SweepResult):
        for k in range(len(result.budgets)):
            for mode in result.modes:
                writer.writerows(solution_rows(result.series[mode][k]))
    else:
        writer.writerows(solution_rows(_as_solution(result)))
    return buf.getvalue()


def read_csv(path) -> list[dict]:
    numeric = {"budget", "power", "user_capacity_bits", "sum_capacity_bits"}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        return [{k: float(v) if k in numeric else v for k, v in row.items()} for row in reader]


# -- SVG --------------------------------------------------------------------


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    return [lo + (hi - lo) * k / (count - 1) for k in range(count)]


def svg_text(result: SweepResult, width: int = 720, height: int = 460) -> str:
    """Sum capacity against relay power, one polyline per mode."""
    log_x = result.spacing == "log" and min(result.budgets) > 0
    xs = [math.log10(b) if log_x else b for b in result.budgets]
    ys = {m: result.sum_capacity(m).tolist() for m in result.modes}
    all_y = [y for v in ys.values() for y in v]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(all_y), max(all_y)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1, x_hi + 1
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    left, right, top, bottom = 70, 150, 30, 60
    pw, ph = width - left - right, height - top - bottom

    def px(x):
        return left + (x - x_lo) / (x_hi - x_lo) * pw

    def py(y):
        return top + (1 - (y - y_lo) / (y_hi - y_lo)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for tx in _ticks(x_lo, x_hi):
        label = f"1e{tx:.3g}" if log_x else f"{tx:.4g}"
        out.append(f'<line x1="{px(tx):.2f}" y1="{top + ph}" x2="{px(tx):.2f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px(tx):.2f}" y="{top + ph + 18}" text-anchor="middle">{escape(label)}</text>')
    for ty in _ticks(y_lo, y_hi):
        out.append(f'<line x1="{left - 5}" y1="{py(ty):.2f}" x2="{left}" y2="{py(ty):.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{py(ty) + 4:.2f}" text-anchor="end">{ty:.3f}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 15}" text-anchor="middle">relay power</text>')
    out.append(
        f'<text x="18" y="{top + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {top + ph / 2:.1f})">sum capacity (bits)</text>'
    )
    for k, mode in enumerate(result.modes):
        color = PALETTE[k % len(PALETTE)]
        pts = [(px(x), py(y)) for x, y in zip(xs, ys[mode])]
        if len(pts) == 1:
            out.append(f'<circle cx="{pts[0][0]:.2f}" cy="{pts[0][1]:.2f}" r="4" fill="{color}"/>')
        else:
            coords = " ".join(f"{a:.2f},{b:.2f}" for a, b in pts)
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{coords}"/>')
        ly = top + 15 + 18 * k
        out.append(f'<line x1="{left + pw + 12}" y1="{ly}" x2="{left + pw + 36}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 42}" y="{ly + 4}">{escape(mode)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# -- files ------------------------------------------------------------------


def json_text(result) -> str:
    return json.dumps(to_dict(result), indent=2) + "\n"


def emit(result, fmt: str, path) -> Path:
    if fmt == "csv":
        text = csv_text(result)
    elif fmt == "json":
        text = json_text(result)
    elif fmt == "svg":
        if not isinstance(result, SweepResult):
            raise ValueError("SVG output needs a sweep result")
        text = svg_text(result)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    path = Path(path)
    path.write_text(text)
    return path


def load_solution(path, scenario: Scenario) -> NetworkSolution:
    """Rebuild a solution from its JSON form; capacities are recomputed."""
    data = json.loads(Path(path).read_text())
    relays = {r.id: r for r in scenario.relays}
    allocations = {}
    for entry in data["relays"]:
        rid = entry["relay_id"]
        if rid not in relays:
            raise ValueError(f"allocation names unknown relay {rid!r}")
        group = relays[rid].with_budget(float(entry["budget"]))
        by_id = {u["id"]: u for u in entry["users"]}
        if set(by_id) != set(group.user_ids):
            raise ValueError(f"relay {rid!r}: allocation users do not match the scenario")
        strategies = {uid: Strategy(by_id[uid]["strategy"]) for uid in group.user_ids}
        powers = [float(by_id[uid]["power"]) for uid in group.user_ids]
        if any(p < 0 for p in powers):
            raise ValueError(f"relay {rid!r}: negative power in allocation")
        tag = Strategy(entry["strategy"]) if entry.get("strategy") else None
        allocations[rid] = build_allocation(
            group, strategies, powers, float(entry.get("water_level", 0.0)),
            float(entry.get("slack", 0.0)), scenario.prefactor, tag,
        )
    return NetworkSolution(data.get("mode", "custom"), allocations, budget=data.get("budget"))
