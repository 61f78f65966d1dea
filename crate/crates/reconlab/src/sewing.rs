//! Sewing (in progress).
