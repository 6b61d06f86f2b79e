from .campaign import (
    OptimizationReport,
    RunRecord,
    ittc57_cf,
    load_records,
    optimize_reduced,
    run_campaign,
    sample_parameters,
    save_records,
    save_report,
    save_summary_csv,
)
from .config import CampaignConfig
from .surrogate import (
    AnalyticRidgeSurrogate,
    FileSurrogate,
    default_hull_mesh,
    make_surrogate,
)

__all__ = [
    "AnalyticRidgeSurrogate",
    "CampaignConfig",
    "FileSurrogate",
    "OptimizationReport",
    "RunRecord",
    "default_hull_mesh",
    "ittc57_cf",
    "load_records",
    "make_surrogate",
    "optimize_reduced",
    "run_campaign",
    "sample_parameters",
    "save_records",
    "save_report",
    "save_summary_csv",
]
