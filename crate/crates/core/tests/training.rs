use mcted::corpus::*;
use mcted::model::FUSION_LAMBDA;
use mcted::training::*;
use mcted::Error;

fn small() -> Hyperparameters {
    Hyperparameters {
        d_word: 8,
        d_model: 8,
        d_r: 4,
        d_w: 4,
        ..Hyperparameters::synthetic()
    }
}

fn corpus(n: usize, seed: u64) -> Vec<ParsedSentence> {
    generate_synthetic(&GeneratorConfig::default().with_sentences(n), seed).unwrap()
}

#[test]
fn patience_one_with_rising_validation_loss_stops_at_epoch_two() {
    // validation holds the training sentences with every label contradicted,
    // so fitting the training set can only raise validation loss
    let train_set = corpus(30, 1);
    let valid: Vec<ParsedSentence> = train_set
        .iter()
        .map(|s| {
            let flipped = s
                .labels
                .iter()
                .map(|l| if l == NONE_LABEL { "defect".to_string() } else { NONE_LABEL.to_string() })
                .collect();
            s.with_labels(flipped).unwrap()
        })
        .collect();
    let split = CorpusSplit {
        train: train_set,
        valid,
        test: Vec::new(),
        seed: 0,
    };
    let hyper = Hyperparameters {
        patience: 1,
        epochs: 20,
        dropout_rate: 0.0,
        learning_rate: 0.05,
        ..small()
    };
    let run = train(&hyper, &split, &TrainOptions::default()).unwrap();
    let h = &run.history;
    assert!(h.valid_loss[1] > h.valid_loss[0], "{:?}", h.valid_loss);
    assert_eq!((h.best_epoch, h.stop_epoch, h.stop_reason), (1, 2, StopReason::Patience));
}

#[test]
fn same_seed_gives_bit_identical_runs() {
    let split = split_corpus(&corpus(60, 2), [0.8, 0.1, 0.1], 2).unwrap();
    let hyper = Hyperparameters { epochs: 3, ..small() };
    let runs: Vec<_> = (0..2)
        .map(|_| {
            let sink = MetricsSink::memory();
            let options = TrainOptions {
                metrics: Some(&sink),
                run_id: "r".into(),
                ..TrainOptions::default()
            };
            let run = train(&hyper, &split, &options).unwrap();
            (run, sink.lines())
        })
        .collect();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&runs[0].0.history.train_loss), bits(&runs[1].0.history.train_loss));
    assert_eq!(runs[0].0.model, runs[1].0.model);
    assert_eq!(runs[0].1, runs[1].1);

    let other = train(&Hyperparameters { seed: 9, ..hyper }, &split, &TrainOptions::default()).unwrap();
    assert_ne!(bits(&other.history.train_loss), bits(&runs[0].0.history.train_loss));
}

#[test]
fn best_epoch_parameters_are_kept() {
    let split = split_corpus(&corpus(60, 3), [0.8, 0.1, 0.1], 3).unwrap();
    let run = train(&Hyperparameters { epochs: 6, ..small() }, &split, &TrainOptions::default()).unwrap();
    let h = &run.history;
    let min = h.valid_loss.iter().cloned().fold(f64::INFINITY, f64::min);
    assert_eq!(h.best_valid_loss(), Some(min));
    assert!(h.stop_epoch - h.best_epoch <= 15);
    let again = evaluate(&run.model, &split.valid).unwrap();
    assert_eq!(again.loss, min);
}

#[test]
fn evaluate_is_pure() {
    let split = split_corpus(&corpus(40, 4), [0.8, 0.1, 0.1], 4).unwrap();
    let run = train(&Hyperparameters { epochs: 2, ..small() }, &split, &TrainOptions::default()).unwrap();
    let a = evaluate(&run.model, &split.test).unwrap();
    let b = evaluate(&run.model, &split.test).unwrap();
    assert_eq!(a, b);
}

#[test]
fn nan_embeddings_diverge_with_history() {
    let split = split_corpus(&corpus(30, 5), [0.8, 0.1, 0.1], 5).unwrap();
    let token = &split.train[0].tokens[0];
    let nan_row = vec!["NaN"; 8].join(" ");
    let embeddings = format!("{token} {nan_row}\n");
    let options = TrainOptions {
        embeddings: Some(&embeddings),
        ..TrainOptions::default()
    };
    match train(&Hyperparameters { epochs: 3, ..small() }, &split, &options) {
        Err(Error::Diverged { epoch, history }) => {
            assert_eq!(epoch, 1);
            assert_eq!(history.train_loss.len(), 1);
            assert_eq!(history.stop_reason, StopReason::Diverged);
        }
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn empty_valid_split_is_rejected() {
    let c = corpus(10, 6);
    let split = CorpusSplit { train: c, valid: Vec::new(), test: Vec::new(), seed: 0 };
    assert!(matches!(train(&small(), &split, &TrainOptions::default()), Err(Error::Contract(_))));
}

#[test]
fn learnable_lambda_stays_positive() {
    let split = split_corpus(&corpus(40, 7), [0.8, 0.1, 0.1], 7).unwrap();
    let hyper = Hyperparameters {
        learnable_lambda: true,
        learning_rate: 0.5,
        epochs: 3,
        ..small()
    };
    let run = train(&hyper, &split, &TrainOptions::default()).unwrap();
    let lambda = run.model.params.get(FUSION_LAMBDA).unwrap();
    assert!(lambda.data().iter().all(|&l| l >= 1e-6));
    assert_ne!(lambda.data(), &[2.0, 1.0, 2.0]);
}

#[test]
fn full_label_rate_reproduces_plain_training() {
    let split = split_corpus(&corpus(40, 8), [0.8, 0.1, 0.1], 8).unwrap();
    let hyper = Hyperparameters { epochs: 2, ..small() };
    let plain = train(&hyper, &split, &TrainOptions::default()).unwrap().test.unwrap();
    let swept = sweep(&hyper, &split, SweepAxis::LabelRate, &[1.0], None).unwrap();
    assert_eq!(swept[0].1, plain);

    let half = subsample(&split.train, 0.5, 8).unwrap();
    assert_eq!(half.len(), 16);
    assert_eq!(half, subsample(&split.train, 0.5, 8).unwrap());
    assert!(subsample(&split.train, 0.0, 8).is_err());
    assert!(sweep(&hyper, &split, SweepAxis::Layers, &[], None).is_err());
}

#[test]
fn ablation_variants_share_the_split() {
    let split = split_corpus(&corpus(40, 9), [0.8, 0.1, 0.1], 9).unwrap();
    let variants: Vec<Variant> = ["G1", "homogeneous", "freeze-A"].iter().map(|v| v.parse().unwrap()).collect();
    let out = ablate(&Hyperparameters { epochs: 1, ..small() }, &split, &variants, None).unwrap();
    assert_eq!(out.len(), 3);
    assert!(out.iter().all(|(_, r)| r.tokens == split.test.iter().map(|s| s.len()).sum::<usize>()));
    assert!(ablate(&small(), &split, &[], None).is_err());
}
