#!/usr/bin/env python3

from .asset_selling import AssetSellingSpec, AssetThreshold, asset_threshold, build_asset_selling_mdp, expected_gain
from .transplant import (
    TransplantReport,
    TransplantSpec,
    build_transplant_mdp,
    lifetime_cdf,
    monthly_death_probs,
    policy_values,
    solve_transplant,
    survival_chain,
    survival_expectation,
    survival_value
)
