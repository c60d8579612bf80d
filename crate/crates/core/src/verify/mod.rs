//! Numerical checks of the recovery theory at desk scale.

mod certificate;
mod constants;
mod lemmas;

pub use certificate::{
    build_dual_certificate, check_proposition1, write_certificate_csv, CertificateReport,
    PRACTICAL_GAP_THRESHOLD,
};
pub use constants::{bernstein_bound, TheoryConstants};
pub use lemmas::{lemma6_check, lemma_suite, lemma_suite_with, Lemma6Report, LemmaRow, LemmaSuite, LemmaSuiteConfig};
