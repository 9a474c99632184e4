//! One-off timing calibration for the dense kernels on this machine.
//! Run explicitly with `cargo test -p specwave --test calibrate -- --ignored --nocapture`.

use ndarray::Array2;
use num_complex::Complex64;
use std::time::Instant;

#[test]
#[ignore]
fn time_dense_kernels() {
    let n = 1000;
    let a = Array2::from_shape_fn((n, n), |(i, j)| ((i * 31 + j * 17) as f64 * 0.123).sin());
    let sym = &a + &a.t();
    let ac = a.mapv(|x| Complex64::new(x, 0.1 * x));

    let t0 = Instant::now();
    let (vals, vecs) = specwave::linalg::eig_general(&a).unwrap();
    println!(
        "dgeev   {}x{}: {:.2?}  (|λ|max={:.3})",
        n,
        n,
        t0.elapsed(),
        vals.iter().map(|z| z.norm()).fold(0.0, f64::max)
    );
    let t0 = Instant::now();
    let vinv = specwave::linalg::inv_c(&vecs).unwrap();
    println!("zgetri  {}x{}: {:.2?}", n, n, t0.elapsed());
    let t0 = Instant::now();
    let prod = vecs.dot(&vinv);
    println!(
        "zgemm   {}x{}: {:.2?}  (‖XX⁻¹−I‖max={:.2e})",
        n,
        n,
        t0.elapsed(),
        {
            let mut m = 0.0f64;
            for ((i, j), v) in prod.indexed_iter() {
                let idv = if i == j { 1.0 } else { 0.0 };
                m = m.max((v - Complex64::new(idv, 0.0)).norm());
            }
            m
        }
    );
    let t0 = Instant::now();
    let (evals, _) = specwave::linalg::eigh_sym(&sym).unwrap();
    println!(
        "dsyev   {}x{}: {:.2?}  (λmin={:.3})",
        n,
        n,
        t0.elapsed(),
        evals[0]
    );
    let t0 = Instant::now();
    let s = specwave::linalg::singular_values_c(&ac).unwrap();
    println!("zgesvd  {}x{}: {:.2?}  (σmax={:.3})", n, n, t0.elapsed(), s[0]);
}
