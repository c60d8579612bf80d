//! End-to-end completion procedures and the trial protocol that scores them.

mod algorithm1;
mod gain;
mod protocol;
mod two_phase;

pub use algorithm1::{
    algorithm1_column_incoherent, algorithm1_sample_bound, algorithm1_trials, row_probability,
    Algorithm1Config, Algorithm1Report, Algorithm1Trial,
};
pub use gain::{
    calibrate_constant, gain_report, render_table, write_gain_csv, write_trials_csv, Calibration, GainReport,
    SchemeFamily, SweepStep, DEFAULT_SWEEP_CAP, GAIN_CSV_HEADER, TRIALS_CSV_HEADER,
};
pub use protocol::{profile_of, recover_with_scheme, ErrorMode, TrialProtocol, TrialRecord, TrialSummary};
pub use two_phase::{two_phase_sample, TwoPhaseSample};
