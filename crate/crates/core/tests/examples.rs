//! Every example compiles into this test binary and runs to completion.

macro_rules! example {
    ($name:ident, $file:literal, |$out:ident| $check:expr) => {
        mod $name {
            #![allow(dead_code)]
            include!(concat!("../examples/", $file));

            #[test]
            fn runs() {
                let $out = run_example().expect("example failed");
                assert!($check);
            }
        }
    };
}

example!(smoothness, "smoothness_estimation.rs", |l| l.len() == 6);
example!(quadratic, "quadratic_convergence.rs", |f| f[0].1 < f[1].1 && f[2].1 > 1e12);
example!(stability, "stability_certificates.rs", |ok| ok);
example!(gradients, "gradient_check.rs", |e| e.0 < 1e-5 && e.1 > 1e-4);
example!(comparison, "optimizer_comparison.rs", |r| r.len() == 3);
example!(classification, "mnist_classification.rs", |dir| {
    let ok = dir.join("records.csv").exists() && dir.join("summary.json").exists();
    let _ = std::fs::remove_dir_all(&dir);
    ok
});
example!(idx, "idx_roundtrip.rs", |same| same);
