// quick scale probe (not part of the crate)
use borc_core::lattice::{build_lattice, LatticeParams};
use std::time::Instant;

fn main() {
    for (n, delta, rmax) in [(1usize, 0.5f64, 0.99f64), (1, 0.25, 0.99), (2, 0.5, 0.99)] {
        let t0 = Instant::now();
        let params = LatticeParams::new(n, delta, rmax, 12345);
        let lat = build_lattice(&params).unwrap();
        let t1 = Instant::now();
        let n2 = lat.overlap_with_seed(777, 100_000);
        let t2 = Instant::now();
        println!(
            "n={} delta={} rmax={}: {} points, minsep={:.4}, cover_r={:.4}, N={} / reseed N={}, build+audit={:.1}s, overlap2={:.1}s",
            n, delta, rmax, lat.len(), lat.certificate.min_pairwise_distance,
            lat.certificate.covering_radius, lat.certificate.overlap_bound_n, n2,
            (t1 - t0).as_secs_f64(), (t2 - t1).as_secs_f64()
        );
    }
}
