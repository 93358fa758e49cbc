//! Holds the `acceptance` test target, which prints one pass/fail line per
//! acceptance criterion. Run it with `cargo test -p maslov-lab-validation`.
