//! Experiment driver (in progress).
