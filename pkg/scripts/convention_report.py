#!/usr/bin/env python3
"""Measure closed-form accuracy of both slope conventions against true-Q quadrature.

Sweeps the standard validation grid (blocklengths x rates x mean SNRs, single
links plus equal- and unequal-mean combined links), evaluates each convention's
closed form against the adaptive true-Q quadrature oracle, and writes

    reports/convention_accuracy.csv   one row per grid cell
    reports/convention_accuracy.md    summary tables and the offender list

Run from the repository root:  python3 scripts/convention_report.py [--with-mc]

--with-mc appends a Monte Carlo corroboration of the single worst cell
(4e6 trials, fixed seed); it adds ~30 s and only affects the markdown text.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import statistics
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from fbrelay import (  # noqa: E402
    HypoexpParams,
    fading_outage_mc,
    fading_outage_quadrature,
    fading_outage_quadrature_fixed,
    mrc_pair_outage,
    rayleigh_outage,
)

SNR_DBS = tuple(float(db) for db in range(0, 31, 2))
BLOCKLENGTHS = (100, 200, 500, 1000)
RATES = (0.1, 0.5, 1.0, 2.0)
UNEQUAL_OFFSET_DB = 6.0  # second-branch mean sits this far below the first

WINDOW = (1e-4, 0.5)  # reported range of true outage
PASS_FLOOR = 1e-3  # the <=10% bar applies at or above this outage
PASS_BAR = 0.10

CONVENTIONS = ("nats", "bits")


def _cells():
    off = 10.0 ** (-UNEQUAL_OFFSET_DB / 10.0)
    for db in SNR_DBS:
        omega = 10.0 ** (db / 10.0)
        for n in BLOCKLENGTHS:
            for rate in RATES:
                yield ("single", n, rate, db, omega, math.nan)
                yield ("pair_equal", n, rate, db, omega, omega)
                yield ("pair_unequal", n, rate, db, omega, omega * off)


def _closed(kind: str, n: int, rate: float, oz: float, oy: float, conv: str) -> float:
    if kind == "single":
        return rayleigh_outage(n, rate, oz, conv)
    return mrc_pair_outage(n, rate, HypoexpParams(oz, oy), conv)


def _truth(kind: str, n: int, rate: float, oz: float, oy: float) -> float:
    channel = oz if kind == "single" else HypoexpParams(oz, oy)
    return fading_outage_quadrature(n, rate, channel, abs_tol=1e-12).value


def compute_rows() -> list[dict]:
    rows = []
    for kind, n, rate, db, oz, oy in _cells():
        truth = _truth(kind, n, rate, oz, oy)
        row = {
            "kind": kind,
            "n": n,
            "rate": rate,
            "snr_db": db,
            "omega_z": oz,
            "omega_y": oy,
            "eps_true": truth,
            "in_window": int(WINDOW[0] <= truth <= WINDOW[1]),
            "in_pass_region": int(truth >= PASS_FLOOR and truth <= WINDOW[1] and n >= 100),
        }
        for conv in CONVENTIONS:
            eps = _closed(kind, n, rate, oz, oy, conv)
            row[f"eps_{conv}"] = eps
            row[f"relerr_{conv}"] = abs(eps - truth) / truth if truth > 0.0 else math.nan
        rows.append(row)
    return rows


def _fmt_cell(row: dict) -> str:
    oy = "" if math.isnan(row["omega_y"]) else f"{row['omega_y']:.4g}"
    return (
        f"| {row['kind']} | {row['n']} | {row['rate']} | {row['snr_db']:.0f} "
        f"| {oy or '–'} | {row['eps_true']:.4e} | {row['relerr_nats'] * 100:.1f}% "
        f"| {row['relerr_bits'] * 100:.1f}% |"
    )


def write_reports(rows: list[dict], with_mc: bool, out_dir: Path) -> str:
    out_dir.mkdir(parents=True, exist_ok=True)

    fields = [
        "kind", "n", "rate", "snr_db", "omega_z", "omega_y", "eps_true",
        "eps_nats", "relerr_nats", "eps_bits", "relerr_bits",
        "in_window", "in_pass_region",
    ]
    with (out_dir / "convention_accuracy.csv").open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(row[k]) if isinstance(row[k], float) else row[k]
                             for k in fields})

    window = [r for r in rows if r["in_window"]]
    region = [r for r in rows if r["in_pass_region"]]

    stats = {}
    for conv in CONVENTIONS:
        key = f"relerr_{conv}"
        stats[conv] = {
            "window_max": max(r[key] for r in window),
            "window_mean": statistics.fmean(r[key] for r in window),
            "region_max": max(r[key] for r in region),
            "region_over": sum(1 for r in region if r[key] > PASS_BAR),
        }
    winner = min(CONVENTIONS, key=lambda c: stats[c]["region_max"])
    loser = next(c for c in CONVENTIONS if c != winner)

    offenders = sorted(
        (r for r in region if r[f"relerr_{winner}"] > PASS_BAR),
        key=lambda r: -r[f"relerr_{winner}"],
    )
    clean = [r for r in region if not (r["rate"] == 0.1 and r["n"] <= 200)]
    clean_max = max(r[f"relerr_{winner}"] for r in clean)

    worst = offenders[0] if offenders else max(region, key=lambda r: r[f"relerr_{winner}"])

    buf = io.StringIO()
    p = lambda *a: print(*a, file=buf)  # noqa: E731

    p("# Closed-form accuracy by slope convention")
    p()
    p("Every closed-form outage value in this package rests on a clipped-linear")
    p("surrogate of the Gaussian tail.  The surrogate's slope can be set by two")
    p("conventions, `nats` and `bits`, which differ in the rate spread that the")
    p("slope divides by (`expm1(2R)` versus `expm1(2R ln 2)`).  This report")
    p("measures both against the adaptive quadrature oracle that integrates the")
    p("*true* Gaussian tail over the fading density — no surrogate involved —")
    p("on the standard validation grid:")
    p()
    p(f"- mean SNR 0–30 dB in 2 dB steps ({len(SNR_DBS)} points)")
    p(f"- blocklength n in {BLOCKLENGTHS}")
    p(f"- rate R in {RATES} bits/use")
    p("- three channel kinds per point: one Rayleigh link, a combined link with")
    p(f"  equal branch means, and a combined link with the second branch mean")
    p(f"  {UNEQUAL_OFFSET_DB:.0f} dB below the first")
    p()
    p(f"{len(rows)} cells total; relative errors are reported where the true")
    p(f"outage lies in [{WINDOW[0]:g}, {WINDOW[1]:g}] ({len(window)} cells).")
    p(f"The pass bar — at most {PASS_BAR:.0%} relative error — applies where the")
    p(f"true outage is at least {PASS_FLOOR:g} ({len(region)} cells).")
    p()
    p("## Summary")
    p()
    p("| convention | max rel. err (reported window) | mean rel. err (window) "
      "| max rel. err (pass region) | cells over 10% |")
    p("|---|---|---|---|---|")
    for conv in CONVENTIONS:
        s = stats[conv]
        p(f"| {conv} | {s['window_max'] * 100:.1f}% | {s['window_mean'] * 100:.2f}% "
          f"| {s['region_max'] * 100:.1f}% | {s['region_over']} |")
    p()
    p(f"**Better convention: `{winner}`** (pass-region worst case "
      f"{stats[winner]['region_max'] * 100:.1f}% versus "
      f"{stats[loser]['region_max'] * 100:.1f}% for `{loser}`).  `{winner}` is the")
    p("package default.")
    p()
    p(f"**The 10% pass bar does not hold.**  {stats[winner]['region_over']} cells")
    p(f"exceed it under `{winner}`, every one at rate 0.1 with n ≤ 200 — the")
    p("corner where the decoding threshold and the ramp half-width are of the")
    p("same order, so no straight-line surrogate tracks the curved tail of the")
    p("true conditional error.  Outside that corner (rate ≥ 0.5, or n ≥ 500 at")
    p(f"any rate) the worst case is {clean_max * 100:.1f}%, comfortably inside")
    p("the bar.  The failure is a property of the surrogate family, not of")
    p("either slope convention: both conventions miss at the same cells and in")
    p("the same direction (closed form below truth).")
    p()
    p(f"## Cells over the bar (`{winner}`)")
    p()
    p("| kind | n | rate | SNR dB | second mean | true outage | nats err | bits err |")
    p("|---|---|---|---|---|---|---|---|")
    for r in offenders:
        p(_fmt_cell(r))
    p()
    p("## Worst-cell corroboration")
    p()
    p(f"Worst cell: {worst['kind']}, n={worst['n']}, rate={worst['rate']}, "
      f"mean SNR {worst['snr_db']:.0f} dB.")
    p()
    truth = worst["eps_true"]
    p(f"- adaptive true-Q quadrature: `{truth!r}`")
    kind, n, rate = worst["kind"], worst["n"], worst["rate"]
    channel = worst["omega_z"] if kind == "single" else HypoexpParams(
        worst["omega_z"], worst["omega_y"])
    fixed = fading_outage_quadrature_fixed(n, rate, channel)
    p(f"- fixed Gauss–Legendre quadrature: `{fixed!r}` "
      f"(agrees to {abs(fixed - truth):.1e})")
    if with_mc:
        mc = fading_outage_mc(n, rate, channel, trials=4_000_000, seed=20_260_819)
        p(f"- Monte Carlo, 4e6 trials, seed 20260819: `{mc.value!r}` "
          f"± {mc.std_error:.2e} ({abs(mc.value - truth) / mc.std_error:.2f} sigma "
          "from the quadrature value)")
    for conv in CONVENTIONS:
        p(f"- closed form, `{conv}`: `{worst[f'eps_{conv}']!r}` "
          f"({worst[f'relerr_{conv}'] * 100:.1f}% below truth)")
    p()
    p("The two independent quadrature schemes and the Monte Carlo estimate agree")
    p("with each other and disagree with both closed forms by the same margin:")
    p("the miss is linearization error, not an oracle artifact.")
    p()
    p("Regenerate with `python3 scripts/convention_report.py --with-mc` from the")
    p("repository root.")

    (out_dir / "convention_accuracy.md").write_text(buf.getvalue())
    return winner


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--with-mc", action="store_true",
                    help="corroborate the worst cell with a 4e6-trial Monte Carlo run")
    ap.add_argument("--out-dir", default=str(Path(__file__).resolve().parent.parent / "reports"))
    args = ap.parse_args()

    rows = compute_rows()
    winner = write_reports(rows, args.with_mc, Path(args.out_dir))
    print(f"wrote convention_accuracy.csv and .md ({len(rows)} cells, winner: {winner})")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
