//! Brute-force verification over finite quotient rings.

mod group;
mod ring;
mod submodules;
mod weil;

pub use group::{Character, FiniteAbelianGroup, GROUP_BUDGET};
pub use ring::{FiniteQuotientRing, RingElement};
pub use submodules::{enumerate_submodules, rational_factors};
pub use weil::{
    additive_character, all_characters, predicted_orders, quotient_group, restriction_table, subtorus_image,
    weil_characters_mod, QuotientGroup, Qz, RestrictionClass, RestrictionTable, SubgroupCharacter, UnitaryCharacter,
};
