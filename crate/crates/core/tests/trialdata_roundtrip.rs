use proptest::prelude::*;
use spoofeval::trialdata::{format_score, write_protocol, write_scores, Precision};
use spoofeval::{join, parse_protocol, parse_scores, CmKey, Error, TrialId};

fn protocol_line() -> impl Strategy<Value = (String, Option<String>, Option<String>)> {
    let env = prop::option::of("[abc]{3}");
    let attack = prop::option::of(prop_oneof!["A[0-9]{2}", "[ABC]{2}"]);
    ("S[0-9]{3}", env, attack)
}

proptest! {
    #[test]
    fn protocol_round_trips(lines in prop::collection::vec(protocol_line(), 1..40)) {
        let text: String = lines
            .iter()
            .enumerate()
            .map(|(i, (spk, env, attack))| {
                let key = if attack.is_some() { "spoof" } else { "bonafide" };
                format!(
                    "{spk} T{i:05} {} {} {key}\n",
                    env.as_deref().unwrap_or("-"),
                    attack.as_deref().unwrap_or("-")
                )
            })
            .collect();
        let parsed = parse_protocol::<CmKey>(&text).unwrap();
        prop_assert_eq!(write_protocol(&parsed), text);
    }

    #[test]
    fn full_precision_scores_round_trip(values in prop::collection::vec(-1e6f64..1e6, 1..50)) {
        let ids: Vec<TrialId> = (0..values.len()).map(|i| TrialId::new(format!("t{i}")).unwrap()).collect();
        let text = write_scores(ids.iter().zip(values.iter().copied()), Precision::Full);
        let back = parse_scores::<f64>(&text).unwrap();
        for (id, v) in ids.iter().zip(&values) {
            prop_assert_eq!(back[id], *v);
        }
    }
}

#[test]
fn join_reports_both_directions() {
    let proto = parse_protocol::<CmKey>("S1 a - - bonafide\nS1 b - A01 spoof\n").unwrap();
    let missing = parse_scores::<f64>("a 1.0\n").unwrap();
    assert!(matches!(join(&proto, &missing), Err(Error::MissingScores { count: 1, .. })));
    let extra = parse_scores::<f64>("a 1.0\nb 2.0\nc 3.0\n").unwrap();
    assert!(matches!(join(&proto, &extra), Err(Error::UnmatchedScores { count: 1, .. })));
    let none = parse_scores::<f64>("z 1.0\n").unwrap();
    assert!(matches!(join(&proto, &none), Err(Error::EmptyIntersection)));
    assert!(parse_scores::<f64>("a 1.0\na 2.0\n").is_err());
    assert!(parse_scores::<f64>("a nan\n").is_err());
    assert_eq!(format_score(0.123456789, Precision::Standard), "0.123457");
}
