use num_complex::Complex64;
use univalent::extended::{chordal_distance, ExtComplex};
use univalent::geometry::{interior_grid, CompactRegion};
use univalent::ode::{
    meromorphic_lu_runge, reconstruct_from_schwarzian, ReconstructionFrame, SchwarzianOde,
};
use univalent::rational::{schwarzian, Polynomial, RationalFunction};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn scratch_pole_reconstruction_diagnostics() {
    let f = RationalFunction::new(
        Polynomial::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]),
        Polynomial::identity(),
    )
    .unwrap();
    let region = CompactRegion::disk(c(0.0, 0.0), 0.5).unwrap();
    let s_f = schwarzian(&f).unwrap();
    println!("S_f = {:?} / {:?}", s_f.numerator(), s_f.denominator());

    // reconstruct with the EXACT Schwarzian expanded as Taylor to degree 40:
    // -6/(z^2-1)^2 = -6 sum (k+1) z^{2k}
    let mut coeffs = vec![c(0.0, 0.0); 41];
    for k in 0..=20 {
        coeffs[2 * k] = c(-6.0 * (k as f64 + 1.0), 0.0);
    }
    let ode = SchwarzianOde::new(Polynomial::new(coeffs));
    // frame at z0 = 0.125 replicating the library's construction
    let z0 = c(0.125, 0.0);
    let fp = f.derivative();
    let fpp = fp.derivative();
    let fv = f.eval(z0).finite().unwrap();
    let fpv = fp.eval(z0).finite().unwrap();
    let fppv = fpp.eval(z0).finite().unwrap();
    let sq = fpv.sqrt();
    let u2 = 1.0 / sq;
    let u2p = -0.5 * fppv / (sq * fpv);
    let u1 = fv * u2;
    let u1p = sq + fv * u2p;
    let frame = ReconstructionFrame::new(z0, (u1, u1p), (u2, u2p)).unwrap();
    let rec = reconstruct_from_schwarzian(&ode, &frame);

    let grid = interior_grid(&region, 0.5 / 8.0).unwrap();
    let mut worst = (0.0, c(0.0, 0.0));
    for &z in &grid.points {
        let a = rec.eval(z).unwrap();
        let b = f.eval(z);
        let d = chordal_distance(a, b);
        if d > worst.0 {
            worst = (d, z);
        }
    }
    println!(
        "exact-S taylor reconstruction: worst chordal {}  at z = {}",
        worst.0, worst.1
    );
    let probe = worst.1;
    println!(
        "  f({probe}) = {:?}   rec = {:?}",
        f.eval(probe),
        rec.eval(probe).unwrap()
    );

    // library pipeline with diagnostics per degree
    for cap in [8usize, 16, 32, 64] {
        match meromorphic_lu_runge(&f, &region, 1e-30, cap) {
            Err(univalent::Error::DegreeCapExceeded { best_error, .. }) => {
                println!("degree cap {cap}: best chordal {best_error}");
            }
            other => println!("degree cap {cap}: unexpected {other:?}"),
        }
    }
}

#[test]
fn scratch_frame_quality() {
    // does the frame itself reproduce f at z0 under the exact ODE?
    let f = RationalFunction::new(
        Polynomial::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]),
        Polynomial::identity(),
    )
    .unwrap();
    let z0 = c(0.125, 0.0);
    let fp = f.derivative();
    let fpp = fp.derivative();
    let fv = f.eval(z0).finite().unwrap();
    let fpv = fp.eval(z0).finite().unwrap();
    let fppv = fpp.eval(z0).finite().unwrap();
    let sq = fpv.sqrt();
    let u2 = 1.0 / sq;
    let u2p = -0.5 * fppv / (sq * fpv);
    let u1 = fv * u2;
    let u1p = sq + fv * u2p;
    println!("u1 {u1} u1p {u1p} u2 {u2} u2p {u2p}");
    println!("wronskian = {}", u1 * u2p - u1p * u2);
    // exact values: u2 = 1/sqrt(f'), compare at another point via formulas
    let z1 = c(0.25, 0.0);
    let fpv1 = fp.eval(z1).finite().unwrap();
    let exact_u2_z1 = 1.0 / fpv1.sqrt();
    println!("exact |u2(z1)| = {}", exact_u2_z1.norm());
}
