//! Exponential polynomials: canonical forms, derivatives, rigorous
//! enclosures and certificates for the question "does `P(ā, ·)` have a zero?"

pub mod budget;
pub mod calculus;
pub mod driver;
pub mod epoly;
pub mod gaussian;
pub mod numerics;
pub mod rootcert;
pub mod term;
pub mod zerofree;

// The guide's code blocks run as doctests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/terms.md")]
    mod terms {}
    #[doc = include_str!("../../../book/src/canonical-forms.md")]
    mod canonical_forms {}
    #[doc = include_str!("../../../book/src/derivatives.md")]
    mod derivatives {}
    #[doc = include_str!("../../../book/src/numerics.md")]
    mod numerics {}
    #[doc = include_str!("../../../book/src/zero-free.md")]
    mod zero_free {}
    #[doc = include_str!("../../../book/src/zeros.md")]
    mod zeros {}
    #[doc = include_str!("../../../book/src/deciding.md")]
    mod deciding {}
    #[doc = include_str!("../../../book/src/clauses.md")]
    mod clauses {}
    #[doc = include_str!("../../../book/src/certificates.md")]
    mod certificates {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
