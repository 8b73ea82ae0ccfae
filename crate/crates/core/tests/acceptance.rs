//! End-to-end acceptance checks. Runs as a plain binary and prints one
//! PASS/FAIL line per criterion; exits non-zero when any criterion fails.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gentool_core::jsonl;
use gentool_core::metrics::{aggregate, levenshtein, normalized_levenshtein, rank_analysis, score_instance, EvalReport, OVERALL};
use gentool_core::provider::{HashEmbedder, MockGenerator};
use gentool_core::retrieval::{index_tools, related_example_count, ToolIndex, DEFAULT_K};
use gentool_core::scenarios::{
    cluster_tools, compile_corpus, soundness_violations, split_clusters, ScenarioCorpus, SplitPlan,
    DEFAULT_SPLIT_RATIO,
};
use gentool_core::synthesis::{mock_seed_corpus, SynthesisConfig, Synthesizer};
use gentool_core::textio::{parse_model_output, render_gold, RenderedExample};
use gentool_core::{
    PairType, ParameterSpec, QueryToolCluster, RankedOutput, Scenario, ToolCall, ToolSpec, TrainingInstance,
    SENTINEL_TOOL,
};

struct Pipeline {
    clusters: Vec<QueryToolCluster>,
    index: ToolIndex,
    plan: SplitPlan,
    corpus: ScenarioCorpus,
}

fn mock_pipeline(seeds: usize, seed: u64, jobs: usize) -> Pipeline {
    let synth = Synthesizer::new(MockGenerator::new(seed), SynthesisConfig::default());
    let clusters: Vec<QueryToolCluster> = synth
        .build_clusters(&mock_seed_corpus(seeds, seed), jobs)
        .into_iter()
        .collect::<Result<_, _>>()
        .expect("mock synthesis succeeds");
    let index = index_tools(&cluster_tools(&clusters), &HashEmbedder::default()).expect("index");
    let ids: Vec<&str> = clusters.iter().map(|c| c.id.as_str()).collect();
    let plan = split_clusters(&ids, DEFAULT_SPLIT_RATIO, seed).expect("split");
    let corpus = compile_corpus(&clusters, &plan, &index, DEFAULT_K).expect("compile");
    Pipeline {
        clusters,
        index,
        plan,
        corpus,
    }
}

fn gold_report(instances: &[&TrainingInstance]) -> EvalReport {
    aggregate(
        instances
            .iter()
            .map(|inst| score_instance(inst, &parse_model_output(&render_gold(inst))))
            .collect(),
    )
}

type Outcome = Result<String, String>;

type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// 1
fn gold_self_evaluation() -> Outcome {
    let p = mock_pipeline(50, 7, 4);
    let instances: Vec<&TrainingInstance> = p.corpus.all_instances().collect();
    check(instances.len() >= 200, || format!("only {} instances", instances.len()))?;
    let start = Instant::now();
    let report = gold_report(&instances);
    let elapsed = start.elapsed();
    let overall = &report.aggregates[OVERALL];
    let shown = format!(
        "{:.2} {:.2} {:.2} {:.2}",
        overall.tool_selection, overall.param_name, overall.param_value, overall.format
    );
    check(shown == "100.00 100.00 100.00 100.00", || format!("overall {shown}"))?;
    check(report.records.iter().all(|r| {
        r.tool_selection == 1.0 && r.param_name == 1.0 && r.param_value == 1.0 && r.format_ok == 1.0
    }), || "some record is below 1".into())?;
    check(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("{} instances, {shown}, render+parse+score {elapsed:?}", instances.len()))
}

// 2
fn oracle_distance(a: &[char], b: &[char], memo: &mut HashMap<(usize, usize), usize>) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let key = (a.len(), b.len());
    if let Some(&d) = memo.get(&key) {
        return d;
    }
    let cost = usize::from(a[0] != b[0]);
    let d = (oracle_distance(&a[1..], b, memo) + 1)
        .min(oracle_distance(a, &b[1..], memo) + 1)
        .min(oracle_distance(&a[1..], &b[1..], memo) + cost);
    memo.insert(key, d);
    d
}

fn oracle(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    oracle_distance(&a, &b, &mut HashMap::new())
}

fn strings_up_to(len: usize) -> Vec<String> {
    let mut all = vec![String::new()];
    let mut frontier = vec![String::new()];
    for _ in 0..len {
        frontier = frontier
            .iter()
            .flat_map(|s| ['a', 'b', 'c'].map(|c| format!("{s}{c}")))
            .collect();
        all.extend(frontier.iter().cloned());
    }
    all
}

fn levenshtein_oracle() -> Outcome {
    let start = Instant::now();
    let small = strings_up_to(4);
    let mut compared = 0usize;
    for a in &small {
        for b in &small {
            let want = oracle(a, b);
            check(levenshtein(a, b) == want, || format!("d({a:?}, {b:?}) != {want}"))?;
            compared += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x1e7e);
    let random = |rng: &mut ChaCha8Rng| -> String {
        let len = rng.random_range(0..=8);
        (0..len).map(|_| ['a', 'b', 'c'][rng.random_range(0..3)]).collect()
    };
    for _ in 0..100_000 {
        let (a, b) = (random(&mut rng), random(&mut rng));
        let want = oracle(&a, &b);
        check(levenshtein(&a, &b) == want, || format!("d({a:?}, {b:?}) != {want}"))?;
        let max = a.chars().count().max(b.chars().count());
        let norm = if max == 0 { 1.0 } else { 1.0 - want as f64 / max as f64 };
        check(normalized_levenshtein(&a, &b) == norm, || format!("normalized({a:?}, {b:?})"))?;
        compared += 1;
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("{compared} pairs agree ({} exhaustive up to length 4) in {elapsed:?}", small.len().pow(2)))
}

// 3
fn soundness_scan() -> Outcome {
    let p = mock_pipeline(30, 11, 4);
    let corpus = &p.corpus;
    let train_tools: HashSet<&str> = corpus
        .train
        .iter()
        .flat_map(|i| i.toolset.iter().map(|t| t.name.as_str()))
        .collect();
    let train_queries: HashSet<&str> = corpus.train.iter().map(|i| i.query.as_str()).collect();
    let mut violations = Vec::new();
    let mut checked = 0;
    for inst in corpus.test_instances() {
        checked += 1;
        let sc = inst.scenario;
        if let Some(gold) = inst.gold_tool.as_deref() {
            if sc.seen_tool() != train_tools.contains(gold) {
                violations.push(format!("{}: gold tool seen-ness disagrees with {sc}", inst.id));
            }
        }
        if sc.seen_query() != train_queries.contains(inst.query.as_str()) {
            violations.push(format!("{}: query seen-ness disagrees with {sc}", inst.id));
        }
    }
    violations.extend(soundness_violations(corpus));
    check(checked > 0, || "no test instances".into())?;
    check(violations.is_empty(), || violations.join("; "))?;
    Ok(format!("{checked} test instances, 0 violations"))
}

// 4
fn expected_label(inst: &TrainingInstance, cluster: &QueryToolCluster) -> Vec<String> {
    let names: BTreeSet<&str> = inst.toolset.iter().map(|t| t.name.as_str()).collect();
    let mut head: Vec<&str> = Vec::new();
    if let Some(gold) = inst.gold_tool.as_deref() {
        head.push(gold);
        if gold == cluster.strong_tool.name && names.contains(cluster.weak_tool.name.as_str()) {
            head.push(&cluster.weak_tool.name);
        }
    }
    head.push(SENTINEL_TOOL);
    let rest = names.iter().filter(|n| !head.contains(n));
    head.iter().copied().chain(rest.copied()).map(String::from).collect()
}

fn construction_cardinalities() -> Outcome {
    let p = mock_pipeline(30, 13, 4);
    let by_id: HashMap<&str, &QueryToolCluster> = p.clusters.iter().map(|c| (c.id.as_str(), c)).collect();
    for id in &p.plan.train_cluster_ids {
        let of: Vec<&TrainingInstance> = p.corpus.train.iter().filter(|i| &i.cluster_id == id).collect();
        let z = of.iter().filter(|i| i.pair_type == PairType::ZeroToOne).count();
        let w = of.iter().filter(|i| i.pair_type == PairType::WeakToStrong).count();
        check(z == 4 && w == 2 && of.len() == 6, || format!("cluster {id}: {z} zero-to-one, {w} weak-to-strong"))?;
    }
    let mut labels = 0;
    for inst in p.corpus.all_instances() {
        check(inst.toolset.len() == 6, || format!("{}: {} toolset entries", inst.id, inst.toolset.len()))?;
        let sentinels = inst.toolset.iter().filter(|t| t.name == SENTINEL_TOOL).count();
        check(sentinels == 1, || format!("{}: {sentinels} sentinels", inst.id))?;
        let want = expected_label(inst, by_id[inst.cluster_id.as_str()]);
        check(inst.rank_label == want, || format!("{}: label {:?}, expected {want:?}", inst.id, inst.rank_label))?;
        labels += 1;
    }
    Ok(format!(
        "{} training clusters at 4+2, {labels} toolsets of 6 with re-derived labels",
        p.plan.train_cluster_ids.len()
    ))
}

// 5
fn tool(name: &str, params: &[&str]) -> ToolSpec {
    params
        .iter()
        .fold(ToolSpec::new(name, format!("{name} tool")), |t, p| t.param(ParameterSpec::new(*p, *p)))
        .returns("status", "Status")
}

fn fixture(toolset: Vec<ToolSpec>, gold: ToolCall) -> TrainingInstance {
    let mut names: Vec<String> = toolset.iter().map(|t| t.name.clone()).collect();
    names.push(SENTINEL_TOOL.to_string());
    let mut toolset = toolset;
    toolset.push(ToolSpec::sentinel());
    TrainingInstance {
        id: "fixture".into(),
        toolset,
        query: String::new(),
        gold_tool: Some(gold.tool_name.clone()),
        gold_call: gold,
        rank_label: names,
        pair_type: PairType::TestOnly,
        scenario: Scenario::SeenQuerySeenTool,
        cluster_id: "fixture".into(),
    }
}

/// A two-task response whose ranking is `ranking` and whose task 2 holds `calls`.
fn two_task(ranking: &[&str], calls: &[&str]) -> String {
    serde_json::json!({
        "The output of the first task: ": ranking,
        "The output of the second task: ": calls,
    })
    .to_string()
}

fn scores(inst: &TrainingInstance, text: &str) -> (RankedOutput, [f64; 4]) {
    let out = parse_model_output(text);
    let s = score_instance(inst, &out);
    (out, [s.format_ok, s.tool_selection, s.param_name, s.param_value])
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-12
}

fn parser_robustness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xf022);
    let fuzz = panic::catch_unwind(AssertUnwindSafe(|| {
        for i in 0..100_000usize {
            let len = rng.random_range(0..96);
            let mut bytes: Vec<u8> = (0..len).map(|_| rng.random()).collect();
            if i % 2 == 0 {
                // Bias half the inputs towards JSON-looking structure.
                let alphabet = b"{}[]\":,'()= \\abn_";
                for b in bytes.iter_mut() {
                    *b = alphabet[*b as usize % alphabet.len()];
                }
            }
            let _ = parse_model_output(&String::from_utf8_lossy(&bytes));
        }
    }));
    check(fuzz.is_ok(), || "parser panicked under fuzzing".into())?;

    // Car rental: the fine-tuned response (its missing colon after the first
    // key restored) succeeds; the zero-shot free-text answer fails format.
    let rental = fixture(
        vec![
            tool("flight_pickup_service", &["flight_number", "arrival_time", "pickup_location", "destination"]),
            tool("car_transfer_service", &["pickup_time", "pickup_location", "destination", "vehicle_type", "passenger_name"]),
            tool("simple_car_rental", &["pickupLocation", "dropOffLocation", "pickupTime", "dropOffTime", "carCode"]),
            tool("airport_dropoff_service", &["dropoff_time", "flight_number", "pickup_location", "airport_name"]),
            tool("taxi_booking", &["pickup_time", "pickup_location", "destination", "passenger_name", "luggage_count"]),
        ],
        ToolCall::new("simple_car_rental").arg("carCode", "ABC123"),
    );
    let tuned = r#"{"The output of the first task: ": ["simple_car_rental", "generate_response", "car_transfer_service", "flight_pickup_service", "airport_dropoff_service", "taxi_booking"], "The output of the second task: ": ["simple_car_rental(carCode='ABC123')"]}"#;
    let (_, s) = scores(&rental, tuned);
    check(s == [1.0; 4], || format!("car rental fine-tuned scores {s:?}"))?;
    let zero_shot = r#"car_transfer_service {"pickup_time": "2023-03-15T12:00:00", "pickup_location": "Airport", "destination": "Car Rental Agency", "vehicle_type": "Sedan", "passenger_name": "John Doe"}"#;
    let (out, s) = scores(&rental, zero_shot);
    check(!out.parse_ok && s == [0.0; 4], || format!("car rental zero-shot scores {s:?}"))?;

    // Repair service: strong tool, weak tool, then the sentinel.
    let repair = fixture(
        vec![
            tool("appliance_repair_rescheduling", &["originalRequestID", "newTime"]),
            tool("appliance_repair_status_query", &["requestID", "applianceType", "applianceBrand", "applianceModel", "contactInformation", "address"]),
            tool("appliance_repair_cancellation", &["requestID", "cancellationReason"]),
            tool("appliance_repair_request", &["applianceType", "applianceBrand", "applianceModel", "issueDescription", "contactInformation", "address", "time"]),
            tool("repair_service_request", &["device", "make", "model_number", "issue", "phone", "address", "appointment_time"]),
        ],
        ToolCall::new("repair_service_request")
            .arg("device", "microwave")
            .arg("make", "LG")
            .arg("model_number", "LMV2031ST")
            .arg("issue", "not heating food")
            .arg("phone", "876-543-2109")
            .arg("address", "404 Cedar St")
            .arg("appointment_time", "Friday at 1 PM"),
    );
    let tuned = r#"{"The output of the first task: ": ["repair_service_request", "appliance_repair_request", "generate_response", "appliance_repair_status_query", "appliance_repair_cancellation", "appliance_repair_rescheduling"], "The output of the second task: ": ["repair_service_request(device='microwave', make='LG', model_number='LMV2031ST', issue='not heating food', phone='876-543-2109', address='404 Cedar St', appointment_time='Friday at 1 PM')"]}"#;
    let (out, s) = scores(&repair, tuned);
    check(s == [1.0; 4], || format!("repair fine-tuned scores {s:?}"))?;
    check(
        out.ranking[..3] == ["repair_service_request", "appliance_repair_request", SENTINEL_TOOL],
        || format!("repair ranking {:?}", out.ranking),
    )?;
    let zero_shot = r#"appliance_repair_status_query {"requestID": "876-543-2109", "applianceType": "LG microwave"}"#;
    let (out, _) = scores(&repair, zero_shot);
    check(!out.parse_ok, || "repair zero-shot text parsed".into())?;

    // The remaining error cases, expressed in the two-task output format.
    let washer = fixture(
        vec![tool("schedule_repair_service", &["appliance", "model", "problem", "contact", "location", "appointment_time"])],
        ToolCall::new("schedule_repair_service")
            .arg("appliance", "LG washing machine")
            .arg("model", "WM3900HBA")
            .arg("problem", "making a loud noise during the spin cycle")
            .arg("contact", "987-654-3210")
            .arg("location", "456 Elm St")
            .arg("appointment_time", "Saturday at 2 PM"),
    );
    let (_, s) = scores(
        &washer,
        &two_task(
            &["schedule_repair_service", SENTINEL_TOOL],
            &["schedule_repair_service(appliance='washing machine', model='WM3900HBA', problem='loud noise', contact='987-654-3210', location='456 Elm St', time='Saturday 2 PM')"],
        ),
    );
    // 5 of 6 keys shared; values: 3 deletions over 18 chars, 31 over 41, one key missing.
    let want_values = (15.0 / 18.0 + 1.0 + 10.0 / 41.0 + 1.0 + 1.0 + 0.0) / 6.0;
    check(
        s[0] == 1.0 && s[1] == 1.0 && close(s[2], 5.0 / 6.0) && close(s[3], want_values),
        || format!("washer scores {s:?}, expected names 5/6 and values {want_values}"),
    )?;

    let reminder = fixture(
        vec![tool("create_event_reminder", &["event_name", "event_time", "event_location"])],
        ToolCall::new("create_event_reminder")
            .arg("event_name", "Dinner Reservation at The Gourmet Bistro")
            .arg("event_time", "2023-10-25T19:00:00")
            .arg("event_location", "The Gourmet Bistro"),
    );
    let (_, s) = scores(
        &reminder,
        &two_task(
            &["create_event_reminder", SENTINEL_TOOL],
            &["create_event_reminder(event_name='The Gourmet Bistro', event_time='2023-10-25T19:00:00', event_location='Dinner Reservation')"],
        ),
    );
    check(s[0] == 1.0 && s[1] == 1.0 && s[2] == 1.0 && s[3] > 0.0 && s[3] < 1.0, || format!("reminder scores {s:?}"))?;

    let estate = fixture(
        vec![
            tool("real_estate_search_tool", &["location", "priceRange", "areaRange", "propertyType", "bedrooms", "bathrooms"]),
            tool("simple_apartment_comparator", &["apartmentID", "marketPrice"]),
        ],
        ToolCall::new("real_estate_search_tool").arg("location", "center of Beijing"),
    );
    let (_, s) = scores(
        &estate,
        &two_task(
            &["simple_apartment_comparator", SENTINEL_TOOL],
            &["simple_apartment_comparator(apartmentID='A123', marketPrice='3200000')"],
        ),
    );
    check(s == [1.0, 0.0, 0.0, 0.0], || format!("real estate scores {s:?}"))?;

    let bond_call = "savings_bond_lookup(bond_term='36', issue_date=\"today's date\", interest_method='periodic interest payments', coupon_rate_type='fixed coupon rate', term_variability='variable term type', keyword='government bonds')";
    let bond = fixture(
        vec![tool("savings_bond_lookup", &["bond_term", "issue_date", "interest_method", "coupon_rate_type", "term_variability", "keyword"])],
        ToolCall::new("savings_bond_lookup")
            .arg("bond_term", "36")
            .arg("issue_date", "today's date")
            .arg("interest_method", "periodic")
            .arg("coupon_rate_type", "fixed")
            .arg("term_variability", "variable")
            .arg("keyword", "government bonds"),
    );
    for calls in [vec![bond_call, bond_call], vec![&*format!("{bond_call} {bond_call}")]] {
        let (out, s) = scores(&bond, &two_task(&["savings_bond_lookup", SENTINEL_TOOL], &calls));
        check(out.parse_ok && s[1] == 1.0 && s[2] == 1.0 && s[3] < 1.0, || format!("duplicate bond calls scored {s:?}"))?;
    }

    let jobs = fixture(
        vec![
            tool("job_info_search", &["jobTitle", "industry", "location", "postDate"]),
            tool("basic_job_search_tool", &["jobTitle", "location", "salary"]),
        ],
        ToolCall::new("basic_job_search_tool")
            .arg("jobTitle", "Content Writer")
            .arg("location", "Sydney")
            .arg("salary", "50k-70k"),
    );
    let (_, s) = scores(
        &jobs,
        &two_task(
            &["job_info_search", SENTINEL_TOOL],
            &["job_info_search(jobTitle='Content Writer', location='Sydney', salaryRange='50k-70k')"],
        ),
    );
    check(s == [1.0, 0.0, 0.0, 0.0], || format!("job search scores {s:?}"))?;

    let calendar = fixture(
        vec![tool("create_event", &["event_title", "date", "start_time", "end_time", "venue"])],
        ToolCall::new("create_event")
            .arg("event_title", "Team Building Activity")
            .arg("date", "2023-10-14")
            .arg("start_time", "14:00")
            .arg("end_time", "16:00")
            .arg("venue", "company meeting room"),
    );
    let (out, s) = scores(&calendar, &two_task(&[SENTINEL_TOOL, "create_event"], &["generate_response()"]));
    check(out.parse_ok && out.invocation.is_sentinel(), || "bare generate_response() did not parse".into())?;
    check(s[0] == 1.0 && s[1] == 0.0, || format!("calendar scores {s:?}"))?;

    Ok("100000 fuzz inputs without a panic; 11 fixture responses behave as expected".into())
}

// 6
/// Gold answers, except that the first `n_bad` outputs swap their top two
/// ranking entries. A swap turns the top tool away from the invoked one; it
/// misplaces one pair unless both swapped tools are useful.
fn perturbed(instances: &[TrainingInstance], n_bad: usize) -> (Vec<RankedOutput>, usize, usize) {
    let mut wrong_pairs = 0;
    let mut total_pairs = 0;
    let outputs = instances
        .iter()
        .enumerate()
        .map(|(i, inst)| {
            total_pairs += inst.toolset.len() - 1;
            let mut ranking = inst.rank_label.clone();
            if i < n_bad {
                ranking.swap(0, 1);
                if inst.useful_tools().len() != 2 {
                    wrong_pairs += 1;
                }
            }
            RankedOutput {
                ranking,
                invocation: inst.gold_call.clone(),
                raw_text: String::new(),
                parse_ok: true,
            }
        })
        .collect();
    (outputs, wrong_pairs, total_pairs)
}

fn rank_analysis_recovery() -> Outcome {
    let p = mock_pipeline(50, 17, 4);
    let instances: Vec<TrainingInstance> = p.corpus.all_instances().take(200).cloned().collect();
    check(instances.len() == 200, || format!("only {} instances", instances.len()))?;
    let mut lines = Vec::new();
    for rate in [0.0, 0.25, 0.5] {
        let n_bad = (rate * instances.len() as f64) as usize;
        let (outputs, wrong, pairs) = perturbed(&instances, n_bad);
        let got = rank_analysis(&outputs, &instances).map_err(|e| e.to_string())?;
        let want_consistency = 100.0 * (1.0 - rate);
        let want_ordering = 100.0 * (pairs - wrong) as f64 / pairs as f64;
        check(
            close(got.consistency, want_consistency) && close(got.ordering_accuracy, want_ordering) && got.pairs == pairs,
            || format!("p={rate}: got {got:?}, expected {want_consistency} / {want_ordering} over {pairs} pairs"),
        )?;
        lines.push(format!("p={rate}: {:.2}/{:.2}", got.consistency, got.ordering_accuracy));
    }
    Ok(lines.join(", "))
}

// 7
fn run_bytes(jobs: usize) -> Vec<u8> {
    let p = mock_pipeline(24, 23, jobs);
    let mut out = Vec::new();
    out.extend(jsonl::to_string(&p.clusters).into_bytes());
    out.extend(serde_json::to_vec(&p.plan).unwrap());
    out.extend(jsonl::to_string(&p.corpus.train).into_bytes());
    for bucket in p.corpus.test.values() {
        out.extend(jsonl::to_string(bucket).into_bytes());
    }
    let all: Vec<&TrainingInstance> = p.corpus.all_instances().collect();
    let renders: Vec<RenderedExample> = all.iter().map(|i| RenderedExample::new(i)).collect();
    out.extend(jsonl::to_string(&renders).into_bytes());
    out.extend(serde_json::to_vec(&gold_report(&all)).unwrap());
    out.extend(format!("{:?}", p.index.len()).into_bytes());
    out
}

fn determinism() -> Outcome {
    let a = run_bytes(1);
    let b = run_bytes(8);
    check(a == b, || "two runs with the same seed differ".into())?;
    Ok(format!("two runs (1 and 8 workers) agree on {} bytes", a.len()))
}

// 8
fn brute_cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

fn relatedness() -> Outcome {
    let tools: Vec<ToolSpec> = mock_seed_corpus(50, 29).into_iter().map(|s| s.gold_tool).collect();
    let index = index_tools(&tools, &HashEmbedder::default()).map_err(|e| e.to_string())?;
    let mut related_pairs = 0;
    for target in &tools {
        let tv = &index.get(&target.name).unwrap().vector.values;
        let want = tools
            .iter()
            .filter(|t| brute_cosine(&index.get(&t.name).unwrap().vector.values, tv) > 0.5)
            .count();
        let got = related_example_count(&tools, target, &index, 0.5).map_err(|e| e.to_string())?;
        check(got == want, || format!("{}: {got} vs brute force {want}", target.name))?;
        related_pairs += want;
    }
    Ok(format!("50 tools, {related_pairs} related ordered pairs (including self-pairs) agree"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("gold self-evaluation", gold_self_evaluation),
        ("levenshtein oracle equivalence", levenshtein_oracle),
        ("scenario soundness scan", soundness_scan),
        ("construction cardinalities", construction_cardinalities),
        ("parser robustness", parser_robustness),
        ("rank-analysis recovery", rank_analysis_recovery),
        ("determinism", determinism),
        ("relatedness analysis", relatedness),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|e| Err(e.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} acceptance criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
