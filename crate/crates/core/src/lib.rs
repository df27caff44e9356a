// Copyright 2026 The paramp Authors
// SPDX-License-Identifier: Apache-2.0

//! Input-output theory of Josephson parametric amplifiers: stiff-pump
//! scattering, pump depletion, classical steady states and thresholds,
//! Gaussian and truncated-Wigner fluctuations, and circuit parameter maps.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod circuits;
pub mod cli;
pub mod depletion;
pub mod error;
pub mod fluctuations;
pub mod model;
pub mod scattering;
pub mod semiclassical;
pub mod wigner_mc;
