//! Margin training with a dynamic oracle and error exploration.

mod oracle;

pub use oracle::{oracle_cost, oracle_cost_after, OracleState};

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ConfigError;
use crate::corpus::{Sentence, WordDropout};
use crate::engine::{compare_actions, Action, NeuralScorer, Parser, SelectMode};
use crate::error::{Error, Result};
use crate::eval::{evaluate, PunctPolicy};
use crate::model::Model;
use crate::nn::{Adam, Gradients, ParamStore};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub seed: u64,
    /// Follow the model's own (possibly wrong) choices while training.
    pub explore: bool,
    /// Treat actions on already-lost arcs as correct.
    pub dynamic_oracle: bool,
    /// Chance of following the best wrong action inside the margin.
    pub p_aug: f64,
    /// Swap the margin-zone branch: follow the best wrong action with
    /// probability `1 - p_aug` instead of `p_aug`.
    pub flip_margin_branch: bool,
    pub margin: f64,
    /// Word-dropout `alpha`; zero disables dropout.
    pub word_dropout: f64,
    /// Positive losses to collect before a parameter update.
    pub batch_errors: usize,
    pub learning_rate: f64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 20,
            seed: 1,
            explore: true,
            dynamic_oracle: true,
            p_aug: 0.1,
            flip_margin_branch: false,
            margin: 1.0,
            word_dropout: 0.25,
            batch_errors: 50,
            learning_rate: 0.001,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    /// Gold-following training with the static oracle.
    pub fn without_exploration(self) -> Self {
        TrainConfig {
            explore: false,
            dynamic_oracle: false,
            ..self
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, value: f64| ConfigError::BadValue {
            key: key.into(),
            value: value.to_string(),
        };
        if !(0.0..=1.0).contains(&self.p_aug) {
            return Err(bad("p_aug", self.p_aug));
        }
        if !(self.margin > 0.0) {
            return Err(bad("margin", self.margin));
        }
        if !(self.word_dropout >= 0.0) {
            return Err(bad("word_dropout", self.word_dropout));
        }
        if !(self.learning_rate > 0.0) {
            return Err(bad("learning_rate", self.learning_rate));
        }
        if self.batch_errors == 0 {
            return Err(ConfigError::NonPositive("batch_errors"));
        }
        if self.explore && !self.dynamic_oracle {
            return Err(ConfigError::Inconsistent(
                "exploration needs the dynamic oracle: after an error the static oracle may have no correct action".into(),
            ));
        }
        Ok(())
    }
}

/// `max(0, margin - score_g + score_w)` when positive.
pub fn step_loss(score_g: f64, score_w: f64, margin: f64) -> Option<f64> {
    let l = margin - score_g + score_w;
    (l > 0.0).then_some(l)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Follow {
    Gold,
    Wrong,
}

/// Which of the best correct and best wrong actions to apply next.
pub fn choose_followed<R: Rng>(score_g: f64, score_w: f64, cfg: &TrainConfig, rng: &mut R) -> Follow {
    let delta = score_g - score_w;
    if delta < 0.0 {
        Follow::Wrong
    } else if delta < cfg.margin {
        let hit = rng.gen::<f64>() < cfg.p_aug;
        if hit != cfg.flip_margin_branch {
            Follow::Wrong
        } else {
            Follow::Gold
        }
    } else {
        Follow::Gold
    }
}

/// Gradients of collected losses, waiting for the next update.
#[derive(Clone, Debug)]
pub struct LossAccumulator {
    grads: Gradients,
    count: usize,
    threshold: usize,
}

impl LossAccumulator {
    pub fn new(store: &ParamStore, threshold: usize) -> Self {
        LossAccumulator {
            grads: Gradients::new(store),
            count: 0,
            threshold,
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn gradients(&self) -> &Gradients {
        &self.grads
    }

    pub fn is_full(&self) -> bool {
        self.count >= self.threshold
    }

    /// Applies one optimizer step if anything was collected.
    pub fn flush(&mut self, adam: &mut Adam, store: &mut ParamStore) -> bool {
        if self.count == 0 {
            return false;
        }
        adam.step(store, &self.grads);
        self.grads.clear();
        self.count = 0;
        true
    }
}

/// Word ids, tag ids and gold tree of one training sentence.
#[derive(Clone, Debug)]
pub struct Instance {
    pub words: Vec<usize>,
    pub tags: Vec<usize>,
    pub heads: Vec<usize>,
    pub labels: Vec<usize>,
}

impl Instance {
    pub fn new(model: &Model, sentence: &Sentence) -> Result<Self> {
        let (words, tags) = model.encode_input(sentence, &mut WordDropout::disabled());
        let (heads, labels) = model.gold(sentence)?;
        Ok(Instance {
            words,
            tags,
            heads,
            labels,
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SentenceStats {
    pub steps: usize,
    pub losses: usize,
    pub loss: f64,
    pub followed_wrong: usize,
}

/// Runs the parser over one sentence, collecting margin losses into `acc`.
pub fn train_sentence(
    model: &Model,
    inst: &Instance,
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
    acc: &mut LossAccumulator,
) -> Result<SentenceStats> {
    let n = inst.words.len();
    let mut stats = SentenceStats::default();
    if n < 2 {
        return Ok(stats);
    }
    let scorer = NeuralScorer::new(model.network(), model.params(), &inst.words, &inst.tags)?;
    let mut parser = Parser::new(n, scorer, SelectMode::Lazy)?;
    let mut oracle = OracleState::new(&inst.heads, &inst.labels)?;
    let mut losses = Vec::new();
    while !parser.is_done() {
        let mut best_g: Option<Action> = None;
        let mut best_w: Option<Action> = None;
        for a in parser.candidates() {
            let slot = if oracle.is_correct(&a, cfg.dynamic_oracle) {
                &mut best_g
            } else {
                &mut best_w
            };
            if slot.is_none_or(|b| compare_actions(&a, &b) == Ordering::Greater) {
                *slot = Some(a);
            }
        }
        let g = best_g.ok_or_else(|| Error::Training("no correct action in a reachable state".into()))?;
        let followed = match best_w {
            None => g,
            Some(w) => {
                if let Some(l) = step_loss(g.score, w.score, cfg.margin) {
                    let scorer = parser.scorer_mut();
                    let sg = scorer.score_expr(&g)?;
                    let sw = scorer.score_expr(&w)?;
                    let graph = scorer.graph_mut();
                    let d = graph.sub(sw, sg)?;
                    losses.push(graph.add_const(d, cfg.margin));
                    stats.losses += 1;
                    stats.loss += l;
                }
                if cfg.explore && choose_followed(g.score, w.score, cfg, rng) == Follow::Wrong {
                    stats.followed_wrong += 1;
                    w
                } else {
                    g
                }
            }
        };
        oracle.apply(&followed);
        parser.apply(followed)?;
        stats.steps += 1;
    }
    if !losses.is_empty() {
        let mut graph = parser.into_scorer().into_graph();
        let total = graph.sum(&losses)?;
        graph.backward_into(total, &mut acc.grads)?;
        acc.count += losses.len();
    }
    Ok(stats)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochReport {
    /// 1-based.
    pub epoch: usize,
    pub sentences: usize,
    pub steps: usize,
    pub losses: usize,
    /// Summed hinge loss per training sentence.
    pub mean_loss: f64,
    pub updates: usize,
    pub dev_uas: Option<f64>,
    pub dev_las: Option<f64>,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainSummary {
    pub epochs: Vec<EpochReport>,
    /// Non-projective or unannotated sentences left out.
    pub skipped: usize,
    /// Epoch whose parameters were kept, when a dev set chose it.
    pub best_epoch: Option<usize>,
    pub updates: usize,
}

/// Seconds since the call; browsers without a clock report zero.
fn stopwatch() -> impl Fn() -> f64 {
    #[cfg(not(target_arch = "wasm32"))]
    {
        let start = std::time::Instant::now();
        move || start.elapsed().as_secs_f64()
    }
    #[cfg(target_arch = "wasm32")]
    {
        || 0.0
    }
}

/// Trains `model` in place. With a dev set the parameters of the epoch with the
/// best dev UAS are kept, otherwise those of the last epoch.
pub fn train<F: FnMut(&EpochReport)>(
    model: &mut Model,
    sentences: &[Sentence],
    dev: Option<&[Sentence]>,
    cfg: &TrainConfig,
    mut on_epoch: F,
) -> Result<TrainSummary> {
    cfg.validate()?;
    let mut skipped = 0;
    let mut data = Vec::new();
    for s in sentences {
        if s.arcs.is_none() || !s.is_projective() {
            skipped += 1;
            continue;
        }
        data.push(Instance::new(model, s)?);
    }
    if data.is_empty() {
        return Err(Error::Training("no projective training sentences".into()));
    }
    let mut summary = TrainSummary {
        epochs: Vec::new(),
        skipped,
        best_epoch: None,
        updates: 0,
    };
    if cfg.epochs == 0 {
        return Ok(summary);
    }

    let mut order_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut explore_rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let mut dropout = if cfg.word_dropout > 0.0 {
        WordDropout::new(cfg.word_dropout, cfg.seed.wrapping_add(2))
    } else {
        WordDropout::disabled()
    };
    let mut adam = Adam::with_hyperparams(model.params(), cfg.learning_rate, 0.9, 0.999, 1e-8);
    let mut acc = LossAccumulator::new(model.params(), cfg.batch_errors);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut best: Option<(f64, ParamStore)> = None;
    let policy = PunctPolicy::default();

    for epoch in 1..=cfg.epochs {
        let elapsed = stopwatch();
        if cfg.shuffle {
            order.shuffle(&mut order_rng);
        }
        let mut report = EpochReport {
            epoch,
            sentences: data.len(),
            steps: 0,
            losses: 0,
            mean_loss: 0.0,
            updates: 0,
            dev_uas: None,
            dev_las: None,
            seconds: 0.0,
        };
        let mut loss_sum = 0.0;
        for &i in &order {
            let inst = &data[i];
            let dropped = Instance {
                words: inst
                    .words
                    .iter()
                    .map(|&w| dropout.replace(w, model.vocab()))
                    .collect(),
                ..inst.clone()
            };
            let s = train_sentence(model, &dropped, cfg, &mut explore_rng, &mut acc)?;
            report.steps += s.steps;
            report.losses += s.losses;
            loss_sum += s.loss;
            if acc.is_full() && acc.flush(&mut adam, model.params_mut()) {
                report.updates += 1;
            }
        }
        if acc.flush(&mut adam, model.params_mut()) {
            report.updates += 1;
        }
        if !model.params().iter().all(|(_, p)| p.value.is_finite()) {
            return Err(Error::Training(format!("parameters diverged in epoch {epoch}")));
        }
        report.mean_loss = loss_sum / data.len() as f64;
        if let Some(dev) = dev {
            let predicted = model.parse_all(dev)?;
            let r = evaluate(dev, &predicted, &policy)?;
            report.dev_uas = Some(r.uas);
            report.dev_las = Some(r.las);
            if best.as_ref().is_none_or(|(uas, _)| r.uas > *uas) {
                best = Some((r.uas, model.params().clone()));
                summary.best_epoch = Some(epoch);
            }
        }
        report.seconds = elapsed();
        summary.updates += report.updates;
        on_epoch(&report);
        summary.epochs.push(report);
    }
    if let Some((_, params)) = best {
        *model.params_mut() = params;
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ModelConfig;
    use crate::corpus::{read_conll, Vocab, VocabOptions};

    #[test]
    fn loss_formula() {
        assert_eq!(step_loss(2.5, 0.5, 1.0), None);
        assert!((step_loss(0.2, 0.5, 1.0).unwrap() - 1.3).abs() < 1e-12);
        assert_eq!(step_loss(1.5, 0.5, 1.0), None);
    }

    #[test]
    fn follow_outside_margin() {
        let cfg = TrainConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(choose_followed(-1.0, 0.0, &cfg, &mut rng), Follow::Wrong);
        assert_eq!(choose_followed(5.0, 0.0, &cfg, &mut rng), Follow::Gold);
        assert_eq!(choose_followed(1.0, 0.0, &cfg, &mut rng), Follow::Gold);
    }

    #[test]
    fn margin_zone_rate() {
        let draws = 10_000;
        for flip in [false, true] {
            let cfg = TrainConfig {
                flip_margin_branch: flip,
                ..TrainConfig::default()
            };
            let mut rng = ChaCha8Rng::seed_from_u64(17);
            let wrong = (0..draws)
                .filter(|_| choose_followed(0.5, 0.0, &cfg, &mut rng) == Follow::Wrong)
                .count() as f64
                / draws as f64;
            let p = if flip { 1.0 - cfg.p_aug } else { cfg.p_aug };
            let sigma = (p * (1.0 - p) / draws as f64).sqrt();
            assert!((wrong - p).abs() <= 3.0 * sigma, "rate {wrong} vs {p}");
        }
    }

    #[test]
    fn exploration_without_dynamic_oracle_rejected() {
        let cfg = TrainConfig {
            dynamic_oracle: false,
            ..TrainConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(ConfigError::Inconsistent(_))));
        assert!(TrainConfig::default().without_exploration().validate().is_ok());
    }

    const DATA: &str = "1\tthe\t_\tD\tD\t_\t2\tdet\t_\t_
2\tdog\t_\tN\tN\t_\t3\tnsubj\t_\t_
3\tsaw\t_\tV\tV\t_\t0\troot\t_\t_
4\ta\t_\tD\tD\t_\t5\tdet\t_\t_
5\tcat\t_\tN\tN\t_\t3\tobj\t_\t_

1\tcats\t_\tN\tN\t_\t2\tnsubj\t_\t_
2\tsleep\t_\tV\tV\t_\t0\troot\t_\t_

1\tsleep\t_\tV\tV\t_\t0\troot\t_\t_
";

    fn setup() -> (Model, Vec<Sentence>) {
        let sents = read_conll(DATA.as_bytes()).unwrap();
        let vocab = Vocab::build(&sents, &VocabOptions::default()).unwrap();
        (Model::new(ModelConfig::tiny(), vocab, 5).unwrap(), sents)
    }

    #[test]
    fn zero_epochs_leave_model_unchanged() {
        let (mut m, s) = setup();
        let before = m.params().clone();
        let cfg = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        train(&mut m, &s, None, &cfg, |_| {}).unwrap();
        assert!(m.params().bitwise_eq(&before));
    }

    #[test]
    fn single_word_sentence_has_no_loss() {
        let (m, s) = setup();
        let inst = Instance::new(&m, &s[2]).unwrap();
        let mut acc = LossAccumulator::new(m.params(), 50);
        let st = train_sentence(&m, &inst, &TrainConfig::default(), &mut ChaCha8Rng::seed_from_u64(0), &mut acc).unwrap();
        assert_eq!(st, SentenceStats::default());
        assert_eq!(acc.count(), 0);
    }

    #[test]
    fn training_is_deterministic() {
        let cfg = TrainConfig {
            epochs: 3,
            batch_errors: 2,
            ..TrainConfig::default()
        };
        let (mut a, s) = setup();
        let (mut b, _) = setup();
        let ra = train(&mut a, &s, Some(&s), &cfg, |_| {}).unwrap();
        let rb = train(&mut b, &s, Some(&s), &cfg, |_| {}).unwrap();
        assert!(a.params().bitwise_eq(b.params()));
        assert_eq!(ra.updates, rb.updates);
        assert!(ra.updates > 0);
    }

    #[test]
    fn losses_produce_gradients() {
        let (m, s) = setup();
        let inst = Instance::new(&m, &s[0]).unwrap();
        // gold-following, so every state keeps a wrong alternative
        let cfg = TrainConfig {
            margin: 100.0,
            ..TrainConfig::default().without_exploration()
        };
        let mut acc = LossAccumulator::new(m.params(), 50);
        let st = train_sentence(&m, &inst, &cfg, &mut ChaCha8Rng::seed_from_u64(0), &mut acc).unwrap();
        assert_eq!(st.steps, 4);
        assert_eq!(st.losses, 4);
        assert!(!acc.gradients().is_zero());
    }
}
