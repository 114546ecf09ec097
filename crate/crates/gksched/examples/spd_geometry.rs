//! SPD matrices, matrix logarithms, the log-Euclidean metric, and the
//! Gaussian kernel built on it.

use gksched::spd::{gram, kernel, lem_sq, KernelParams, SpdMatrix, SymMatrix};

fn spd(dim: usize, entries: &[f64]) -> SpdMatrix {
    SpdMatrix::new(SymMatrix::new(dim, entries.to_vec()).unwrap()).unwrap()
}

fn main() {
    // a 2x2 SPD matrix and its eigen-derived logarithm
    let a = spd(2, &[2.0, 1.0, 1.0, 2.0]);
    println!("A = {:?}", a.entries());
    println!("log A = {:?}", a.log().entries());
    println!("min eigenvalue of A = {:.6}", a.min_eigenvalue());

    // squared log-Euclidean distances: zero to itself, positive to others
    let b = spd(2, &[4.0, 0.0, 0.0, 1.0]);
    let c = spd(2, &[1.0, 0.0, 0.0, 1.0]);
    println!("lem_sq(A, A) = {:.3e}", lem_sq(&a, &a).unwrap());
    println!("lem_sq(A, B) = {:.6}", lem_sq(&a, &b).unwrap());
    println!("lem_sq(B, C) = {:.6}", lem_sq(&b, &c).unwrap());

    // the kernel turns distance into similarity in (0, 1]
    let params = KernelParams::new(1.5).unwrap();
    for (name, x) in [("A", &a), ("B", &b), ("C", &c)] {
        println!("k(A, {name}) = {:.6}", kernel(&a, x, &params).unwrap());
    }

    // Gram matrices over SPD collections stay positive semidefinite
    let points = vec![a, b, c];
    let g = gram(&points, &params).unwrap();
    let eig = g.sym_eig().unwrap();
    println!("Gram eigenvalues = {:?}", eig.values);
    assert!(eig.values.iter().all(|&v| v >= -1e-12));
}
