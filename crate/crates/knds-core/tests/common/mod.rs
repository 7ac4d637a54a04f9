//! Shared fixtures for the integration suites.

use std::sync::OnceLock;

use knds_core::geometry::{
    build_radial_profile, horizon_roots, suggested_grid, BlackHoleParams, HorizonData,
    RadialProfile,
};

/// Reference parameter set used throughout the suites.
pub fn p0() -> BlackHoleParams {
    BlackHoleParams::new(1.0, 0.2, 0.2, 0.02, 0.5)
}

pub fn p0_horizon() -> &'static HorizonData {
    static H: OnceLock<HorizonData> = OnceLock::new();
    H.get_or_init(|| horizon_roots(&p0()).unwrap())
}

/// Scattering-grade profile for mode k (cached).
pub fn p0_profile(k: f64) -> &'static RadialProfile {
    static P_HALF: OnceLock<RadialProfile> = OnceLock::new();
    static P_THREE_HALF: OnceLock<RadialProfile> = OnceLock::new();
    let cell = if k == 0.5 {
        &P_HALF
    } else if k == 1.5 {
        &P_THREE_HALF
    } else {
        panic!("only k = 1/2 and 3/2 are cached");
    };
    cell.get_or_init(|| {
        let p = p0();
        let h = p0_horizon();
        let grid = suggested_grid(&p, h, 1e-12, 0.008);
        build_radial_profile(&p, h, k, &grid).unwrap()
    })
}

/// Deterministic xorshift for cheap reproducible sampling in tests.
pub struct TestRng(pub u64);

impl TestRng {
    pub fn next_f64(&mut self) -> f64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn in_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}
