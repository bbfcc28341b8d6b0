"""Energy budget, traces, region norms, weak-form residuals and sweeps."""

from .records import DiagnosticsRecord, energy_budget, make_record, region_norms, trace_norms

__all__ = ["DiagnosticsRecord", "energy_budget", "make_record", "region_norms", "trace_norms"]
