"""Comparison aggregation."""

import time
from collections import defaultdict
from typing import Any, Dict, List, Optional

import numpy as np

from ..analysis import band_average_coherence, band_summary, rank_correlation
from ..core.component import Component, ComponentResult, ComponentStatus

SCHEMA_VERSION = 1


def _finite_or_none(value: float) -> Optional[float]:
    return float(value) if np.isfinite(value) else None


class ComparisonAggregation(Component):
    """Fold per-run outcomes into the comparison report.

    Everything except the ``timing`` section is a pure function of the
    runs' numeric results, so reruns with the same seeds compare equal
    once ``timing`` is dropped.
    """

    def _row(self, outcome: Dict[str, Any]) -> Dict[str, Any]:
        trace = outcome["trace"]
        spectrum = outcome["coherence"]
        row = {
            "variant": outcome["variant"],
            "source": outcome["source"],
            "final_misalignment_db": _finite_or_none(trace.final_db),
            "final_inverse_misalignment": _finite_or_none(trace.inverse[-1]),
            "min_misalignment_db": _finite_or_none(np.min(trace.eta_db)),
            "coherence_full_band": None,
            "coherence_bands": None,
        }
        if spectrum is not None:
            row["coherence_full_band"] = band_average_coherence(spectrum, 0.0, spectrum.sample_rate / 2.0)
            row["coherence_bands"] = band_summary(spectrum)
        return row

    def _summary(self, rows: List[Dict[str, Any]]) -> Dict[str, Any]:
        per_variant: Dict[str, List[Dict[str, Any]]] = defaultdict(list)
        for row in rows:
            per_variant[row["variant"]].append(row)

        variants = {}
        for variant, group in per_variant.items():
            finals = [r["final_misalignment_db"] for r in group if r["final_misalignment_db"] is not None]
            coherences = [r["coherence_full_band"] for r in group if r["coherence_full_band"] is not None]
            variants[variant] = {
                "mean_final_misalignment_db": float(np.mean(finals)) if finals else None,
                "mean_coherence_full_band": float(np.mean(coherences)) if coherences else None,
            }

        ranked = [v for v in variants.values()
                  if v["mean_coherence_full_band"] is not None and v["mean_final_misalignment_db"] is not None]
        rho = None
        if len(ranked) >= 2:
            rho = _finite_or_none(rank_correlation(
                [1.0 - v["mean_coherence_full_band"] for v in ranked],
                [-v["mean_final_misalignment_db"] for v in ranked],
            ))
        ordering = sorted(
            (name for name, v in variants.items() if v["mean_final_misalignment_db"] is not None),
            key=lambda name: variants[name]["mean_final_misalignment_db"],
        )
        return {"variants": variants, "rank_correlation": rho, "ranking_by_misalignment": ordering}

    async def execute(self, inputs: Dict[str, Any]) -> ComponentResult:
        started = time.perf_counter()
        try:
            runs: Dict[str, Dict[str, Any]] = inputs["runs"]
            rows = [self._row(outcome) for outcome in runs.values()]
            report = {
                "schema_version": SCHEMA_VERSION,
                "results": rows,
                "summary": self._summary(rows),
                "timing": {key: outcome["runtime_s"] for key, outcome in runs.items()},
            }
            traces = {key: outcome["trace"] for key, outcome in runs.items()}
            spectra = {key: outcome["coherence"] for key, outcome in runs.items() if outcome["coherence"] is not None}
            return ComponentResult(
                status=ComponentStatus.COMPLETED,
                data={"report": report, "traces": traces, "spectra": spectra},
                metadata={"n_runs": len(rows)},
                execution_time=time.perf_counter() - started,
            )
        except Exception as e:
            return ComponentResult.failure(e, started)


def strip_timing(report: Dict[str, Any]) -> Dict[str, Any]:
    """Copy of ``report`` without run-time measurements."""
    return {key: value for key, value in report.items() if key != "timing"}
