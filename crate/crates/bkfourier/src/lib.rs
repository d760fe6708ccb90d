//! Exact-arithmetic Fourier kernels on reductive groups over finite fields.
//!
//! Everything here is computed over `Q(zeta_p)` with bignum rationals: no
//! floating point, no tolerance knobs.  The library builds the finite-field
//! tables (`algebra`), the finite groupoids of stack points (`groupoid`,
//! `groups`), the Braverman-Kazhdan kernels themselves (`kernels`), and the
//! quadratic-space transform they restrict from (`quadform`).  `checks` wires
//! the verification suites used by the `bkfourier` binary.

pub mod algebra;
pub mod checks;
pub mod groupoid;
pub mod groups;
pub mod kernels;
pub mod quadform;
pub mod report;
