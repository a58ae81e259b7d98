use textrait_core::analyze::{group_report, GroupAttribute};
use textrait_core::synth::{generate, SynthConfig};

fn config(lambda: f64) -> SynthConfig {
    SynthConfig {
        documents: 2000,
        length_mean: 200.0,
        signal_strength: lambda,
        seed: 31,
        ..SynthConfig::default()
    }
}

#[test]
fn oracle_correlation_tracks_signal_strength() {
    let rs: Vec<f64> = [0.0, 0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|&l| generate(&config(l)).unwrap().oracle_r)
        .collect();
    assert!(rs[0].abs() < 0.05, "null signal gave {}", rs[0]);
    assert!(rs[4] >= 0.8, "full signal gave {}", rs[4]);
    assert!(rs.windows(2).all(|w| w[1] >= w[0]), "{rs:?}");
}

#[test]
fn same_seed_same_bytes() {
    let a = generate(&config(0.5)).unwrap();
    let b = generate(&config(0.5)).unwrap();
    assert_eq!(a.corpus.to_csv_bytes().unwrap(), b.corpus.to_csv_bytes().unwrap());
    assert_eq!(a.embeddings.to_text(), b.embeddings.to_text());
}

#[test]
fn targets_follow_the_latent_score() {
    let out = generate(&config(1.0)).unwrap();
    let t = out.corpus.targets().unwrap();
    let r = textrait_core::metrics::pearson(&out.latent, &t).unwrap().r;
    assert!(r > 0.8, "{r}");
}

#[test]
fn planted_group_shift_is_visible() {
    let mut c = config(0.0);
    c.documents = 10_000;
    c.genders[0].mean_shift = 0.6;
    let out = generate(&c).unwrap();
    let t = out.corpus.targets().unwrap();
    let d = group_report(&t, &out.corpus, GroupAttribute::Gender).unwrap().cohens_d.unwrap();
    assert!(d > 0.2, "{d}");
}
