use entroshell::correlated::QuadratureSpec;
use entroshell::infoentropy::ho_entropy_sum;
use entroshell::nuclide::{builtin_nuclide, r1_moment};
use entroshell::scaling::{sweep, SweepRow};
use entroshell::workbench::log_grid;

const TABLE1: [(&str, f64, f64, f64, f64); 8] = [
    ("He4", 1.0410, 1.0064, 0.4740, 1.5221),
    ("C12", 2.1885, 1.1548, 1.5579, 1.8282),
    ("O16", 2.6464, 1.1529, 2.5069, 1.9549),
    ("Mg24", 3.7445, 1.2390, 4.1480, 2.1115),
    ("Si28", 4.1641, 1.2548, 5.2681, 2.1959),
    ("S32", 4.5837, 1.2659, 6.2356, 2.2275),
    ("Ar36", 4.9578, 1.2681, 6.2862, 2.1758),
    ("Ca40", 4.7275, 1.2208, 6.5364, 2.0809),
];

fn fit(points: &[(f64, f64)], c0: f64) -> (f64, f64) {
    let mut best = (f64::INFINITY, 0.0, 0.0);
    let mut lam = 0.3;
    while lam < 3.5 {
        let num: f64 = points.iter().map(|&(x, v)| (v - c0) * x.powf(lam)).sum();
        let den: f64 = points.iter().map(|&(x, _)| x.powf(2.0 * lam)).sum();
        let c1 = num / den;
        let cost: f64 = points.iter().map(|&(x, v)| { let r = v - c0 - c1 * x.powf(lam); r * r }).sum();
        if cost < best.0 { best = (cost, c1, lam); }
        lam += 0.0005;
    }
    (best.1, best.2)
}

fn main() {
    let spec = QuadratureSpec::default();
    let grids: Vec<(&str, Vec<f64>)> = vec![
        ("[0.05,0.30]x8", log_grid(0.05, 0.30, 8).unwrap()),
        ("[0.05,0.25]x8", log_grid(0.05, 0.25, 8).unwrap()),
        ("[0.08,0.28]x10", log_grid(0.08, 0.28, 10).unwrap()),
        ("[0.10,0.25]x8", log_grid(0.10, 0.25, 8).unwrap()),
    ];
    for (gname, grid) in &grids {
        println!("=== grid {gname}  (threshold 1e-2)");
        for (i, &(label, ..)) in TABLE1.iter().enumerate() {
            let n = builtin_nuclide(label).unwrap();
            let t = sweep(&n, grid, &spec).unwrap();
            let s0 = ho_entropy_sum(&n).unwrap();
            let r0 = r1_moment(&n).sqrt();
            let rows: Vec<&SweepRow> = t.rows.iter().filter(|r| r.clipped_mass <= 1e-2).collect();
            if rows.len() < 4 { println!("{label:6} (too few rows: {})", rows.len()); continue; }
            let (s1, ls) = fit(&rows.iter().map(|r| (r.inv_y, r.s)).collect::<Vec<_>>(), s0);
            let (r1, lr) = fit(&rows.iter().map(|r| (r.inv_y, r.r_b)).collect::<Vec<_>>(), r0);
            let tr = TABLE1[i];
            println!(
                "{label:6} rows={:2}  s1 {:+6.1}%  ls {:+6.1}%  r1 {:+6.1}%  lr {:+6.1}%",
                rows.len(), (s1/tr.1-1.0)*100.0, (ls/tr.2-1.0)*100.0, (r1/tr.3-1.0)*100.0, (lr/tr.4-1.0)*100.0
            );
        }
    }
}
