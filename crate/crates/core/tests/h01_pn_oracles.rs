//! Brute-force H01(R P_n) against socle and cosocle oracles from the
//! A(1)-module tables, slice by slice in the twist.

use krcore::a1mod::{std_pn, A1Module};
use krcore::grmod::{bd, Window};
use krcore::rfun::apply_r;

/// Dimension of M / (Sq¹M + Sq²M) in degree m.
fn cosocle_dim(p: &A1Module, m: i32) -> usize {
    let sp = p.space();
    let a = p.sq1().block_or_zero(bd(m - 1, 0), sp, sp);
    let b = p.sq2().block_or_zero(bd(m - 2, 0), sp, sp);
    p.dim(m) - a.hstack(&b).rank()
}

fn socle_dim(p: &A1Module, m: i32) -> usize {
    p.socle().0.dim(bd(m, 0))
}

#[test]
fn twist_slices_are_socles_and_cosocles() {
    let w = Window::new(-16, 16, -8, 8);
    for n in 0..=4 {
        let h = apply_r(&std_pn(n, 40), w).unwrap().total.h01();
        let region = h.region;
        assert!(
            region.k_lo <= -6 && region.k_hi >= 6,
            "region too small: {region:?}"
        );
        for d in region.degrees() {
            let want = match d.k {
                t if t >= 0 => socle_dim(&std_pn(n - t, 90), d.m - t),
                -1 => 0,
                t => {
                    let j = -2 - t;
                    cosocle_dim(&std_pn(n + j, 90), d.m - (3 - j))
                }
            };
            assert_eq!(h.dims().get(d), want, "n={n} at {d}");
        }
    }
}
