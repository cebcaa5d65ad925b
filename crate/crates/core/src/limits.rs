/// Size limits shared by the exact algorithms.
///
/// Every exponential procedure checks one of these before starting and
/// refuses with [`crate::Error::CapExceeded`] instead of running away.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Limits {
    /// Largest number of variables enumerated as a single truth table.
    pub enum_cap: usize,
    /// Largest arity accepted by subset searches.
    pub search_arity_cap: usize,
    /// Largest number of candidate subsets a single search may test.
    pub candidate_budget: u64,
    /// Largest number of case splits one probability computation may make
    /// on components that neither fit the enumeration cap nor decompose.
    pub branch_budget: u64,
    /// Largest arity for a single characteristic-function value.
    pub characteristic_cap: usize,
    /// Largest arity for a full Shapley vector.
    pub shapley_cap: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            enum_cap: 26,
            search_arity_cap: 20,
            candidate_budget: 1 << 26,
            branch_budget: 1 << 20,
            characteristic_cap: 16,
            shapley_cap: 12,
        }
    }
}

impl Limits {
    /// Limits used by the reduction verifier, whose reduced instances are
    /// wide but highly structured.
    pub fn for_verification() -> Self {
        Limits {
            search_arity_cap: 512,
            candidate_budget: 1 << 24,
            ..Limits::default()
        }
    }
}
