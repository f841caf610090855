use radon_algebra::TruncationPolicy;
use radon_cli::{
    parse_config, parse_field, parse_gamma_dsl, parse_poly, print_surface, run_pipeline, run_verify, same_surface, Command,
    DslErrorKind, GammaContext, Report,
};
use radon_surface::corpus::{heisenberg, standard_corpus, x_minus_st, x_plus_t};
use serde_json::Value;

fn policy() -> TruncationPolicy {
    TruncationPolicy::new(3, 3, 1e-10).unwrap()
}

fn cx() -> GammaContext {
    GammaContext::new(policy())
}

const HEIS: &str = r#"
seed = 7
[surface]
gamma = "exp[(1,0)->d1] ∘ exp[(0,1)->d2 + x1*d3]"
"#;

const XST: &str = r#"
seed = 7
[surface]
gamma = "x1 - t1*t2"
"#;

fn run(text: &str, cmd: Command) -> Report {
    let cfg = parse_config(text).unwrap();
    run_pipeline(&cfg, text, cmd).unwrap()
}

#[test]
fn series_literals_match_corpus() {
    assert!(same_surface(&parse_gamma_dsl("x1 - t1*t2", &cx()).unwrap(), &x_minus_st(policy())));
    assert!(same_surface(&parse_gamma_dsl("x1 - s1*s2", &cx()).unwrap(), &x_minus_st(policy())));
    assert!(same_surface(&parse_gamma_dsl("x1 + t1", &cx()).unwrap(), &x_plus_t(policy())));
}

#[test]
fn exp_chain_is_heisenberg() {
    let g = parse_gamma_dsl("exp[(1,0)->d1] ∘ exp[(0,1)->d2 + x1*d3]", &cx()).unwrap();
    let h = heisenberg(policy());
    assert_eq!(g.series(), h.series());
    let plain = parse_gamma_dsl("exp[(1,0)->d1] o exp[(0,1)->d2 + x1*d3]", &cx()).unwrap();
    assert!(same_surface(&g, &plain));
}

#[test]
fn dangling_operator_points_at_itself() {
    let e = parse_gamma_dsl("x1 + t1 +", &cx()).unwrap_err();
    assert_eq!(e.kind, DslErrorKind::Syntax);
    assert_eq!((e.line, e.col), (1, 9));
    assert!(e.message.contains("'+'"), "{}", e.message);
}

#[test]
fn error_kinds() {
    let e = parse_gamma_dsl("x1 + y2", &cx()).unwrap_err();
    assert_eq!(e.kind, DslErrorKind::UnknownIdentifier);
    assert_eq!(e.col, 6);

    let e = parse_poly("x3 + t1", 1, 2).unwrap_err();
    assert_eq!(e.kind, DslErrorKind::ArityOverflow);

    let e = parse_gamma_dsl("x1 / t1", &cx()).unwrap_err();
    assert_eq!(e.kind, DslErrorKind::NonPolynomial);
    let e = parse_gamma_dsl("x1 ^ -1", &cx()).unwrap_err();
    assert_ne!(e.kind, DslErrorKind::UnknownIdentifier);

    let e = parse_gamma_dsl("[x1 + t1,\n  x2 + d1]", &cx()).unwrap_err();
    assert_eq!(e.line, 2);

    assert!(parse_field("x1*x1*d2", 2).is_ok());
    assert!(parse_field("d1*d2", 2).is_err());
    assert!(parse_gamma_dsl("x1 + t1/2", &cx()).is_ok());
    assert!(parse_gamma_dsl("x1 + t1/0", &cx()).is_err());
}

#[test]
fn print_parse_round_trip() {
    for (name, g) in standard_corpus(policy(), 5, 40) {
        let text = print_surface(&g);
        let mut c = cx();
        c.dilations = Some(g.dilations.clone());
        c.nt = Some(g.nt());
        c.n = Some(g.n());
        let back = parse_gamma_dsl(&text, &c).unwrap_or_else(|e| panic!("{name}: {text}: {e}"));
        assert!(same_surface(&g, &back), "{name}: {text}");
    }
    for text in ["exp[(1,0)->d1, (0,1)->d2 + x1*d3]", "exp[(1)->x1^2*d1 + 3/2*d1]", "exp[(1,1)->0*d1]"] {
        let g = parse_gamma_dsl(text, &cx()).unwrap();
        let back = parse_gamma_dsl(&print_surface(&g), &cx()).unwrap();
        assert!(same_surface(&g, &back), "{text} -> {}", print_surface(&g));
    }
}

#[test]
fn analyze_dichotomy() {
    let h = run(HEIS, Command::Analyze);
    assert_eq!(h.results["conditions"]["III.A"], "Proved");
    assert!(h.results["pure"].as_array().unwrap().iter().any(|e| e["zero"] == Value::Bool(false)));

    let x = run(XST, Command::Analyze);
    assert_eq!(x.results["conditions"]["III.A"], "Refuted");
    assert_eq!(x.results["conditions"]["III.F"], "Proved");

    let one = run("[surface]\ngamma = \"x1 + t1 + x1*t1^2\"\n", Command::Analyze);
    assert_eq!(one.results["conditions"]["III.A"], "Proved");
    let iiia = one.verdicts.iter().find(|v| v.condition == "III.A").unwrap();
    assert_eq!(serde_json::to_value(&iiia.witness).unwrap()["kind"], "vacuous");
}

#[test]
fn reports_are_deterministic() {
    assert_eq!(run(HEIS, Command::Analyze).to_json(), run(HEIS, Command::Analyze).to_json());
    assert_eq!(run(XST, Command::Prep).to_json(), run(XST, Command::Prep).to_json());
}

#[test]
fn resolved_config_is_recorded() {
    let r = run(XST, Command::Control);
    let v: Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(v["schema"], "radon-report");
    assert_eq!(v["config"]["truncation"]["lt"], 3);
    assert_eq!(v["config"]["kernel"]["points"], 4096);
    assert_eq!(v["provenance"]["seed"], 7);
    assert_eq!(v["provenance"]["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn verify_replays_and_rejects_tampering() {
    for text in [HEIS, XST] {
        let json = run(text, Command::Analyze).to_json();
        let (_, ok) = run_verify(&json).unwrap();
        assert!(ok);
    }

    let mut v: Value = serde_json::from_str(&run(HEIS, Command::Analyze).to_json()).unwrap();
    let mut tampered = false;
    for verdict in v["verdicts"].as_array_mut().unwrap() {
        if verdict["witness"]["kind"] != "certificates" {
            continue;
        }
        for item in verdict["witness"]["items"].as_array_mut().unwrap() {
            for c in item["certificate"]["coefficients"].as_array_mut().unwrap() {
                let s = c["c"].as_str().unwrap().to_string();
                c["c"] = Value::String(format!("{s} + 1"));
                tampered = true;
            }
        }
    }
    assert!(tampered);
    let (_, ok) = run_verify(&v.to_string()).unwrap();
    assert!(!ok);

    let mut v: Value = serde_json::from_str(&run(XST, Command::Analyze).to_json()).unwrap();
    for verdict in v["verdicts"].as_array_mut().unwrap() {
        if verdict["witness"]["kind"] == "refutation" {
            verdict["witness"]["item"]["certificate"]["refutation"]["rank_augmented"] = Value::from(0);
        }
    }
    let (_, ok) = run_verify(&v.to_string()).unwrap();
    assert!(!ok);

    assert!(run_verify("{\"schema\": \"other\"}").is_err());
}

#[test]
fn config_errors() {
    assert!(parse_config("[bogus]\n").is_err());
    assert!(parse_config("[truncation]\nlt = -1\n").is_err());
    let cfg = parse_config("[surface]\ngamma = \"x1+t1\"\ncorpus = \"x+t\"\n").unwrap();
    let e = run_pipeline(&cfg, "", Command::Analyze).unwrap_err();
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn divide_smoke() {
    let text = r#"
seed = 3
[truncation]
lt = 4
lx = 2
[divide]
nt = 1
n = 1
dividend = ["1 + t1 + t1^2*x1 + t1^3"]
generators = [["t1^2 - t1*x1"]]
"#;
    let r = run(text, Command::Divide);
    assert_eq!(r.results["remainder_avoids_leading_exponents"], true);
    assert_eq!(r.results["residual_zero"], true);
    assert_eq!(r.results["idempotent"], true);
}

#[test]
fn prep_smoke() {
    for text in [HEIS, XST] {
        let r = run(text, Command::Prep);
        assert_eq!(r.results["normalization_holds"], true);
        assert_eq!(r.results["reconstruction_exact"], true);
    }
}

#[test]
fn kernel_smoke() {
    let r = run("[kernel]\npoints = 1024\njmin = 4\njmax = 6\n", Command::Kernel);
    assert_eq!(r.results["pass"], true, "{}", r.results);
}

#[test]
fn lie_smoke() {
    let r = run(HEIS, Command::Lie);
    assert_eq!(r.tables[0].name, "closure");
    assert!(!r.tables[0].rows.is_empty());
    assert!(r.tables_tsv().starts_with("# closure\n"));
}
