//! Fixtures shared by the benchmarks.

use wfwl::ntriples::parse_ntriples_str;
use wfwl::synth::{self, SynthConfig};
use wfwl::{BuildOptions, Database};

/// The synthetic university dataset with `universities` universities,
/// schema and data.
pub fn university_data(universities: usize) -> (Vec<wfwl::term::Triple>, Vec<wfwl::term::Triple>) {
    let tbox = parse_ntriples_str(synth::UNIV_BENCH_TBOX, "tbox").expect("bundled schema parses");
    let abox = synth::generate(&SynthConfig {
        universities,
        ..SynthConfig::default()
    });
    (tbox, abox)
}

pub fn university_database(universities: usize) -> Database {
    let (tbox, abox) = university_data(universities);
    Database::build(tbox, abox, BuildOptions::default())
        .expect("synthetic data builds")
        .0
}
