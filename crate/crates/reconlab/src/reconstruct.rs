//! Reconstruction engine (in progress).
