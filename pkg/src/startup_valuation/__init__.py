"""Country ranking, market sizing and rank-tiered DCF valuation for startups."""

from .dataset import (
    NA,
    CountryObservation,
    CountryProfile,
    IndicatorDataset,
    IndicatorDefinition,
    Pillar,
    Polarity,
    parse_country_profile,
    parse_indicator_dataset,
    serialize_indicator_dataset,
    validate_dataset,
)
from .dcf import (
    ProFormaRow,
    ValuationResult,
    build_pro_forma,
    discount_cash_flows,
    project_revenue,
    terminal_value,
    valuate,
    valuate_revenues,
)
from .market import compute_sam, compute_som_schedule, compute_tam
from .ranking import normalize_dataset, overall_rank, pillar_score, rank_dataset, zscore_normalize
from .scenario import DEFAULT_TIER_TABLE, DiscountTier, ScenarioConfig, discount_rate_for_rank

__version__ = "0.1.0"
