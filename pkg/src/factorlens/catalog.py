"""Factor and sector catalog.

Every matrix in the system indexes style factors and sectors by the fixed
orderings defined here; loaders normalize input columns to this order.
"""
from __future__ import annotations

from dataclasses import dataclass, field

# CNE-5 style factor set. The usual enumeration gives nine names and treats
# market capitalization separately; here `size` is carried explicitly as the
# tenth factor so the exposure matrices are 10 wide everywhere.
STYLE_FACTORS = (
    "beta",
    "momentum",
    "size",
    "earning_yield",
    "residual_volatility",
    "growth",
    "book_to_price",
    "leverage",
    "liquidity",
    "non_linear_size",
)

# 28 level-1 industries of the local A-share classification.
SECTOR_NAMES = (
    "agriculture",
    "mining",
    "chemicals",
    "steel",
    "nonferrous_metals",
    "electronics",
    "home_appliances",
    "food_beverage",
    "textiles_apparel",
    "light_manufacturing",
    "pharmaceuticals",
    "utilities",
    "transportation",
    "real_estate",
    "commerce_retail",
    "leisure_services",
    "conglomerates",
    "building_materials",
    "building_decoration",
    "electrical_equipment",
    "defense",
    "computers",
    "media",
    "telecom",
    "banking",
    "non_bank_financials",
    "automobiles",
    "machinery",
)

N_FACTORS = len(STYLE_FACTORS)
N_SECTORS = len(SECTOR_NAMES)
RECORD_DIM = N_FACTORS + N_SECTORS + 1  # exposures + sector weights + cash


@dataclass(frozen=True)
class FactorCatalog:
    """Fixed, ordered naming of the 10 style factors and 28 sectors."""

    style_factors: tuple[str, ...] = STYLE_FACTORS
    sector_names: tuple[str, ...] = SECTOR_NAMES

    def __post_init__(self):
        if len(self.style_factors) != N_FACTORS:
            raise ValueError(f"expected {N_FACTORS} style factors, got {len(self.style_factors)}")
        if len(self.sector_names) != N_SECTORS:
            raise ValueError(f"expected {N_SECTORS} sectors, got {len(self.sector_names)}")
        if len(set(self.style_factors)) != N_FACTORS or len(set(self.sector_names)) != N_SECTORS:
            raise ValueError("catalog names must be unique")

    def factor_index(self, name: str) -> int:
        return self.style_factors.index(name)

    def sector_index(self, name: str) -> int:
        return self.sector_names.index(name)


DEFAULT_CATALOG = FactorCatalog()
