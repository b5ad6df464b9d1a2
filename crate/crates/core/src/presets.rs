//! Grids and widths on which the verification suites are known to resolve
//! the catalog.

use crate::catalog::{GaussPoly, TestSignal};
use crate::grid::GridSpec;
use crate::schrodinger::{ClassicalLattice, WaveGrid};

/// Convolution-algebra identities: 64 × 32 × 32 over [−10,10) × [−6,6)².
pub fn algebra_grid() -> GridSpec {
    GridSpec::new(10.0, 6.0, 6.0, 64, 32, 32).expect("valid preset")
}

/// Representation images: 64³ over [−12,12) × [−8,8)². The (x, y) step
/// keeps √ħ·v within the sampled frequency band for ħ ≤ 1; the s extent
/// holds the twist of products of width-0.9 factors.
pub fn representation_grid() -> GridSpec {
    GridSpec::new(12.0, 8.0, 8.0, 64, 64, 64).expect("valid preset")
}

/// Oscillator runs: 16 × 64 × 64 over [−6,6) × [−8,8)². The flow does not
/// act on s, so s-profiles only need to be resolved (width ≥ 1.2).
pub fn oscillator_grid() -> GridSpec {
    GridSpec::new(6.0, 8.0, 8.0, 16, 64, 64).expect("valid preset")
}

/// 64 wave-grid nodes with equal position and momentum windows.
pub fn wave_grid() -> WaveGrid {
    WaveGrid::balanced(64).expect("valid preset")
}

/// 25 × 25 points over [−3,3]².
pub fn classical_lattice() -> ClassicalLattice {
    ClassicalLattice::new(3.0, 3.0, 25, 25).expect("valid preset")
}

/// Off-centre, non-radial observable for the oscillator runs.
pub fn oscillator_signal() -> TestSignal {
    TestSignal::separable(
        "oscillator-blob",
        1.0,
        GaussPoly::gaussian(0.0, 1.2),
        GaussPoly::with_poly(1.0, 1.0, &[1.0, 0.3]),
        GaussPoly::gaussian(-0.5, 0.9),
    )
}
