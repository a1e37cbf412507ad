use twin_platform::evaluation::{evaluate, load_corpus};
use twin_platform::server::Platform;

#[test]
fn answers_the_operator_question_corpus() {
    let platform = Platform::load(&twin_platform::default_scenario()).unwrap();
    platform.warm_up().unwrap();
    let corpus = load_corpus(&twin_platform::default_questions()).unwrap();
    assert_eq!(corpus.len(), 40);
    let eval = evaluate(&platform.twin, &corpus);
    for m in &eval.misses {
        eprintln!("miss: {:?} expected {} got {}", m.question, m.expected, m.got);
    }
    assert!(eval.correct >= 38, "{} of {} correct", eval.correct, eval.total);
    assert!(eval.mean_latency < 2.0, "mean latency {}", eval.mean_latency);
}
