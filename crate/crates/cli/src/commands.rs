//! One function per subcommand: compute, print (human or JSON), then
//! evaluate `--expect` assertions against the finished result.

use num_bigint::BigUint;
use serde_json::{Map, Value};

use twistcalc_core::automorphism::Automorphism;
use twistcalc_core::engine::{
    self, ReidemeisterValue, SpectrumOptions, SweepCase, SweepOptions,
};
use twistcalc_core::field_solver::{self, FieldClassification};
use twistcalc_core::json;
use twistcalc_core::lattice::ReidNumber;
use twistcalc_core::oracle::{FiniteAutomorphism, FiniteGroupTable, PropositionCheck};
use twistcalc_core::rings::{RingDescriptor, RingElem};
use twistcalc_core::unitriangular::UniTriMatrix;
use twistcalc_core::Error;

use crate::inputs::{self, usage};
use crate::{
    Failure, Global, HsubArgs, OracleArgs, ReidArgs, SolveArgs, SpectrumArgs, SweepArgs,
};

fn run_expects(
    expects: &[String],
    mut eval: impl FnMut(&str) -> Result<bool, Failure>,
) -> Result<(), Failure> {
    for e in expects {
        if !eval(e)? {
            return Err(Failure::Expect(e.clone()));
        }
    }
    Ok(())
}

fn strings<I: IntoIterator<Item = S>, S: ToString>(items: I) -> Value {
    Value::Array(
        items
            .into_iter()
            .map(|x| Value::String(x.to_string()))
            .collect(),
    )
}

/// Compact one-line rendering of a unitriangular matrix: the identity,
/// a single transvection, or a sorted entry list.
fn fmt_matrix(m: &UniTriMatrix) -> String {
    let mut entries: Vec<(usize, usize, String)> = m
        .nonzero_entries()
        .map(|(i, j, e)| (i, j, e.to_string()))
        .collect();
    entries.sort();
    match entries.len() {
        0 => "identity".into(),
        1 => {
            let (i, j, v) = &entries[0];
            format!("T_{{{i},{j}}}({v})")
        }
        _ => entries
            .iter()
            .map(|(i, j, v)| format!("({i},{j})={v}"))
            .collect::<Vec<_>>()
            .join(", "),
    }
}

fn describe_case(case: &SweepCase) -> String {
    let ds: Vec<String> = case.d.iter().map(|x| x.to_string()).collect();
    format!("D=({}) delta={} m={}", ds.join(","), case.delta, case.m)
}

pub fn reid(g: &Global, args: &ReidArgs) -> Result<(), Failure> {
    let auto = inputs::build_automorphism(&args.auto)?;
    let value = engine::reidemeister_number(&auto)?;
    if g.json {
        let mut obj = Map::new();
        obj.insert("ring".into(), Value::String(auto.desc().to_string()));
        obj.insert("n".into(), Value::from(auto.n() as u64));
        match &value {
            ReidemeisterValue::Finite {
                value,
                layer_factors,
            } => {
                obj.insert("value".into(), Value::String(value.to_string()));
                obj.insert("layer_factors".into(), strings(layer_factors));
            }
            ReidemeisterValue::Infinite {
                layer,
                kernel_vector,
            } => {
                obj.insert("value".into(), Value::String("inf".into()));
                obj.insert("witness_layer".into(), Value::from(*layer as u64));
                if let Some(v) = kernel_vector {
                    obj.insert("fixed_vector".into(), strings(v));
                }
            }
        }
        println!("{}", Value::Object(obj));
    } else {
        println!("automorphism: {auto}");
        match &value {
            ReidemeisterValue::Finite {
                value,
                layer_factors,
            } => {
                println!("R = {value}");
                let fs: Vec<String> = layer_factors.iter().map(|f| f.to_string()).collect();
                println!("layer factors: {}", fs.join(", "));
            }
            ReidemeisterValue::Infinite {
                layer,
                kernel_vector,
            } => {
                println!("R = inf");
                println!("witness layer: {layer}");
                if let Some(v) = kernel_vector {
                    let vs: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                    println!("fixed vector: ({})", vs.join(", "));
                }
            }
        }
    }
    run_expects(&g.expects, |e| match e {
        "inf" => Ok(value.is_infinite()),
        s => {
            let want: BigUint = s
                .parse()
                .map_err(|_| usage(format!("unknown expectation {s:?} for reid")))?;
            Ok(matches!(&value, ReidemeisterValue::Finite { value, .. } if *value == want))
        }
    })
}

fn case_json(case: &SweepCase) -> Value {
    let mut obj = Map::new();
    obj.insert("index".into(), Value::from(case.index));
    obj.insert("d".into(), strings(&case.d));
    obj.insert("delta".into(), Value::String(case.delta.to_string()));
    obj.insert("m".into(), Value::from(case.m));
    match &case.value {
        ReidemeisterValue::Finite {
            value,
            layer_factors,
        } => {
            obj.insert("value".into(), Value::String(value.to_string()));
            obj.insert("layer_factors".into(), strings(layer_factors));
        }
        ReidemeisterValue::Infinite { layer, .. } => {
            obj.insert("value".into(), Value::String("inf".into()));
            obj.insert("witness_layer".into(), Value::from(*layer as u64));
        }
    }
    obj.insert(
        "predicted_layer".into(),
        match case.predicted_layer {
            Some(k) => Value::from(k as u64),
            None => Value::Null,
        },
    );
    Value::Object(obj)
}

pub fn sweep(g: &Global, args: &SweepArgs) -> Result<(), Failure> {
    if let Some(jobs) = args.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .ok();
    }
    let desc = RingDescriptor::parse(&args.ring)?;
    let mut opts = SweepOptions {
        unit_count: args.units,
        check_layers: !args.no_layer_check,
        ..SweepOptions::default()
    };
    if let Some(cap) = g.cap {
        opts.case_cap = cap;
    }
    let mut processed = 0u64;
    let report = engine::r_infinity_sweep_with_sink(desc, args.n, &opts, &mut |case| {
        processed += 1;
        if processed % 65536 == 0 {
            eprintln!("processed {processed} cases");
        }
        if g.json {
            println!("{}", case_json(case));
        }
        Ok(())
    })?;
    if g.json {
        let mut obj = Map::new();
        obj.insert("summary".into(), Value::Bool(true));
        obj.insert("ring".into(), Value::String(report.desc.to_string()));
        obj.insert("n".into(), Value::from(report.n as u64));
        obj.insert("total".into(), Value::from(report.total));
        obj.insert("infinite".into(), Value::from(report.infinite));
        obj.insert("finite".into(), Value::from(report.finite));
        obj.insert("guaranteed".into(), Value::Bool(report.guaranteed));
        obj.insert("violations".into(), strings(&report.violations));
        println!("{}", Value::Object(obj));
    } else {
        println!(
            "ring {}, n {}, cases {}",
            report.desc, report.n, report.total
        );
        println!("infinite {}, finite {}", report.infinite, report.finite);
        println!(
            "unit pigeonhole guarantee: {}",
            if report.guaranteed { "yes" } else { "no" }
        );
        for case in &report.finite_cases {
            if let ReidemeisterValue::Finite { value, .. } = &case.value {
                println!("finite case: R = {value} at {}", describe_case(case));
            }
        }
        if report.violations.is_empty() {
            println!("violations: none");
        } else {
            for v in &report.violations {
                println!("violation: {v}");
            }
        }
    }
    run_expects(&g.expects, |e| match e {
        "all-inf" => Ok(report.all_infinite() && report.violations.is_empty()),
        s => Err(usage(format!("unknown expectation {s:?} for sweep"))),
    })
}

pub fn spectrum(g: &Global, args: &SpectrumArgs) -> Result<(), Failure> {
    let desc = RingDescriptor::parse(&args.ring)?;
    let mut opts = SpectrumOptions {
        include_diagonal: !args.no_diagonal,
        heisenberg_bound: args.heis_bound,
        unit_count: args.units,
        ..SpectrumOptions::default()
    };
    if let Some(cap) = g.cap {
        opts.case_cap = cap;
    }
    let report = engine::spectrum_sample(desc, args.n, &opts)?;
    if g.json {
        let mut obj = Map::new();
        obj.insert("ring".into(), Value::String(report.desc.to_string()));
        obj.insert("n".into(), Value::from(report.n as u64));
        obj.insert("total_cases".into(), Value::from(report.total_cases));
        let points: Vec<Value> = report
            .points
            .iter()
            .map(|p| {
                let mut o = Map::new();
                o.insert("value".into(), Value::String(p.value.to_string()));
                o.insert("witness".into(), Value::String(p.witness.clone()));
                Value::Object(o)
            })
            .collect();
        obj.insert("points".into(), Value::Array(points));
        println!("{}", Value::Object(obj));
    } else {
        println!(
            "ring {}, n {}, cases {}",
            report.desc, report.n, report.total_cases
        );
        for p in &report.points {
            println!("R = {}: {}", p.value, p.witness);
        }
    }
    run_expects(&g.expects, |e| {
        if e == "has-inf" {
            return Ok(report.has_infinite());
        }
        if e == "all-even" {
            let two = BigUint::from(2u32);
            return Ok(report
                .finite_values()
                .iter()
                .all(|v| (v % &two) == BigUint::ZERO));
        }
        if let Some(n) = e.strip_prefix("attains:") {
            let want: u64 = n
                .parse()
                .map_err(|_| usage(format!("bad expectation {e:?}")))?;
            return Ok(report.attains(want));
        }
        Err(usage(format!("unknown expectation {e:?} for spectrum")))
    })
}

fn finite_map(
    table: &FiniteGroupTable,
    kind: &str,
) -> Result<FiniteAutomorphism, Failure> {
    match kind {
        "identity" => Ok(FiniteAutomorphism::identity(table)),
        "inverse" => Ok(FiniteAutomorphism::inversion(table)?),
        s => {
            let idx = s
                .strip_prefix("inner:")
                .and_then(|t| t.parse::<usize>().ok())
                .ok_or_else(|| {
                    usage(format!(
                        "--auto wants identity, inverse, inner:G, or ut; got {s:?}"
                    ))
                })?;
            if idx >= table.size() {
                return Err(usage(format!(
                    "inner element {idx} out of range for a group of size {}",
                    table.size()
                )));
            }
            Ok(FiniteAutomorphism::inner(table, idx))
        }
    }
}

pub fn oracle(g: &Global, args: &OracleArgs) -> Result<(), Failure> {
    let cap = g
        .cap
        .map(|c| c as usize)
        .unwrap_or(twistcalc_core::oracle::DEFAULT_ORACLE_CAP);
    let (table, reduced) = if let Some(src) = &args.group {
        (json::group_table_from_json(&inputs::load_json(src)?)?, None)
    } else if let Some(modulus) = args.modulus {
        let auto = inputs::build_automorphism(&args.auto)?;
        let Automorphism::NormalForm(nf) = &auto else {
            return Err(usage(
                "residue reduction works on normal-form automorphisms only",
            ));
        };
        let (t, phi) = twistcalc_core::oracle::ut_mod_with_cap(nf, modulus, cap)?;
        (t, Some(phi))
    } else {
        return Err(usage("oracle needs --group or --mod"));
    };
    let phi = match args.map.as_deref() {
        None | Some("ut") => reduced.ok_or_else(|| {
            usage("--auto is required with --group (identity, inverse, or inner:G)")
        })?,
        Some(kind) => finite_map(&table, kind)?,
    };
    let classes = twistcalc_core::oracle::twisted_classes(&table, &phi);

    let mut checks: Vec<(Option<Vec<usize>>, PropositionCheck)> = Vec::new();
    for kind in &args.check {
        match kind.as_str() {
            "inn" => checks.push((
                None,
                twistcalc_core::oracle::check_inner_invariance(
                    &table,
                    &phi,
                    args.twists,
                    args.seed,
                ),
            )),
            "ind" => checks.push((
                None,
                twistcalc_core::oracle::check_abelian_index(&table, &phi)?,
            )),
            "prod" => {
                let check = match &args.prod_group {
                    Some(src) => {
                        let q = json::group_table_from_json(&inputs::load_json(src)?)?;
                        let kind = args.prod_auto.as_deref().unwrap_or("identity");
                        let phi_q = finite_map(&q, kind)?;
                        twistcalc_core::oracle::check_product(&table, &phi, &q, &phi_q)?
                    }
                    None => twistcalc_core::oracle::check_product(&table, &phi, &table, &phi)?,
                };
                checks.push((None, check));
            }
            "zf" => {
                let subgroups: Vec<Vec<usize>> = match &args.subgroup {
                    Some(s) => vec![inputs::parse_indices(s)?],
                    None => twistcalc_core::oracle::invariant_central_subgroups(&table, &phi)?,
                };
                if subgroups.is_empty() {
                    return Err(usage(
                        "no proper invariant central subgroups to test; pass --subgroup",
                    ));
                }
                for sub in subgroups {
                    let check =
                        twistcalc_core::oracle::check_central_quotient(&table, &phi, &sub)?;
                    checks.push((Some(sub), check));
                }
            }
            other => return Err(usage(format!("unknown check {other:?}"))),
        }
    }

    if g.json {
        let mut obj = Map::new();
        obj.insert("size".into(), Value::from(table.size() as u64));
        obj.insert("classes".into(), Value::from(classes.count as u64));
        obj.insert(
            "representatives".into(),
            Value::Array(
                classes
                    .representatives
                    .iter()
                    .map(|&r| Value::from(r as u64))
                    .collect(),
            ),
        );
        let list: Vec<Value> = checks
            .iter()
            .map(|(sub, c)| {
                let mut o = Map::new();
                o.insert("name".into(), Value::String(c.name.to_string()));
                if let Some(s) = sub {
                    o.insert(
                        "subgroup".into(),
                        Value::Array(s.iter().map(|&x| Value::from(x as u64)).collect()),
                    );
                }
                o.insert("passed".into(), Value::Bool(c.passed));
                o.insert("detail".into(), Value::String(c.detail.clone()));
                Value::Object(o)
            })
            .collect();
        obj.insert("checks".into(), Value::Array(list));
        println!("{}", Value::Object(obj));
    } else {
        println!("group size {}", table.size());
        println!("twisted classes: {}", classes.count);
        let shown: Vec<String> = classes
            .representatives
            .iter()
            .take(32)
            .map(|r| r.to_string())
            .collect();
        let ellipsis = if classes.representatives.len() > 32 {
            ", ..."
        } else {
            ""
        };
        println!("representatives: {}{}", shown.join(", "), ellipsis);
        for (sub, c) in &checks {
            let scope = match sub {
                Some(s) => {
                    let ss: Vec<String> = s.iter().map(|x| x.to_string()).collect();
                    format!(" {{{}}}", ss.join(","))
                }
                None => String::new(),
            };
            let verdict = if c.passed { "pass" } else { "FAIL" };
            println!("check {}{}: {}; {}", c.name, scope, verdict, c.detail);
        }
    }
    run_expects(&g.expects, |e| {
        if e == "all-passed" {
            return Ok(checks.iter().all(|(_, c)| c.passed));
        }
        if e == "strict" {
            let zf: Vec<&PropositionCheck> = checks
                .iter()
                .filter(|(_, c)| c.name == "central-quotient")
                .map(|(_, c)| c)
                .collect();
            return Ok(!zf.is_empty()
                && zf
                    .iter()
                    .all(|c| c.passed && c.detail.contains("(strict)")));
        }
        if let Some(n) = e.strip_prefix("classes:") {
            let want: usize = n
                .parse()
                .map_err(|_| usage(format!("bad expectation {e:?}")))?;
            return Ok(classes.count == want);
        }
        Err(usage(format!("unknown expectation {e:?} for oracle")))
    })
}

pub fn solve(g: &Global, args: &SolveArgs) -> Result<(), Failure> {
    let auto = inputs::build_automorphism(&args.auto)?;
    let desc = auto.desc();
    let classification = field_solver::classify(&auto)?;
    let target: Option<UniTriMatrix> = args
        .target
        .as_deref()
        .map(|s| Ok::<_, Failure>(json::matrix_from_json(desc, &inputs::load_json(s)?)?))
        .transpose()?;

    let mut obj = Map::new();
    obj.insert("ring".into(), Value::String(desc.to_string()));
    obj.insert("n".into(), Value::from(auto.n() as u64));
    let mut human: Vec<String> = Vec::new();
    let mut verified = false;

    match &classification {
        FieldClassification::SingleClass => {
            obj.insert("classification".into(), Value::String("single".into()));
            human.push("classification: a single twisted class".into());
            if let Some(x) = &target {
                if args.central {
                    let (central, witness) = field_solver::conjugate_into_center(&auto, x)?;
                    obj.insert("central".into(), json::matrix_to_json(&central));
                    obj.insert("witness".into(), json::matrix_to_json(&witness));
                    human.push(format!("central part: {}", fmt_matrix(&central)));
                    human.push(format!("witness: {}", fmt_matrix(&witness)));
                } else {
                    let z = field_solver::solve_twisted(&auto, x)?;
                    verified = true;
                    obj.insert("z".into(), json::matrix_to_json(&z));
                    obj.insert("verified".into(), Value::Bool(true));
                    human.push(format!("Z = {}", fmt_matrix(&z)));
                    human.push("verified: z . phi(z)^{-1} reproduces the target".into());
                }
            }
        }
        FieldClassification::Infinite {
            layer,
            fixed_vector,
        } => {
            obj.insert("classification".into(), Value::String("infinite".into()));
            obj.insert("witness_layer".into(), Value::from(*layer as u64));
            obj.insert("fixed_vector".into(), strings(fixed_vector));
            human.push("classification: infinitely many twisted classes".into());
            human.push(format!("witness layer: {layer}"));
            let vs: Vec<String> = fixed_vector.iter().map(|x| x.to_string()).collect();
            human.push(format!("fixed vector: ({})", vs.join(", ")));
            if args.central {
                if let Some(x) = &target {
                    let (central, witness) = field_solver::conjugate_into_center(&auto, x)?;
                    obj.insert("central".into(), json::matrix_to_json(&central));
                    obj.insert("witness".into(), json::matrix_to_json(&witness));
                    human.push(format!("central part: {}", fmt_matrix(&central)));
                    human.push(format!("witness: {}", fmt_matrix(&witness)));
                }
            }
        }
    }
    if g.json {
        println!("{}", Value::Object(obj));
    } else {
        for line in human {
            println!("{line}");
        }
    }
    run_expects(&g.expects, |e| match e {
        "single" => Ok(matches!(classification, FieldClassification::SingleClass)),
        "infinite" => Ok(matches!(
            classification,
            FieldClassification::Infinite { .. }
        )),
        "verified" => Ok(verified),
        s => Err(usage(format!("unknown expectation {s:?} for solve"))),
    })
}

pub fn hsub(g: &Global, args: &HsubArgs) -> Result<(), Failure> {
    let auto = inputs::build_automorphism(&args.auto)?;
    let desc = auto.desc();
    let h = engine::central_subgroup_h(&auto)?;

    // optional membership query for a pair of corner values
    let pair = match (&args.a, &args.b) {
        (Some(a), Some(b)) => {
            let a = RingElem::parse(desc, a)?;
            let b = RingElem::parse(desc, b)?;
            match engine::central_conjugator_with(&auto, &h, &a, &b) {
                Ok(z) => Some((a, b, Some(z))),
                Err(Error::NotConjugate) => Some((a, b, None)),
                Err(e) => return Err(e.into()),
            }
        }
        (None, None) => None,
        _ => return Err(usage("--a and --b go together")),
    };

    if g.json {
        let mut obj = Map::new();
        obj.insert("ring".into(), Value::String(desc.to_string()));
        obj.insert("n".into(), Value::from(auto.n() as u64));
        obj.insert("index".into(), Value::String(h.index.to_string()));
        let gens: Vec<Value> = h
            .generators
            .iter()
            .map(|gen| {
                let mut o = Map::new();
                o.insert("defect".into(), strings(&gen.defect));
                o.insert("conjugator".into(), json::matrix_to_json(&gen.conjugator));
                Value::Object(o)
            })
            .collect();
        obj.insert("generators".into(), Value::Array(gens));
        if let Some((a, b, z)) = &pair {
            let mut o = Map::new();
            o.insert("a".into(), Value::String(a.to_string()));
            o.insert("b".into(), Value::String(b.to_string()));
            o.insert("conjugate".into(), Value::Bool(z.is_some()));
            if let Some(z) = z {
                o.insert("z".into(), json::matrix_to_json(z));
            }
            obj.insert("pair".into(), Value::Object(o));
        }
        println!("{}", Value::Object(obj));
    } else {
        println!("ring {}, n {}", desc, auto.n());
        println!("index [R : H] = {}", h.index);
        println!("generators: {}", h.generators.len());
        for gen in &h.generators {
            let ds: Vec<String> = gen.defect.iter().map(|x| x.to_string()).collect();
            println!(
                "  defect ({}) via z = {}",
                ds.join(", "),
                fmt_matrix(&gen.conjugator)
            );
        }
        if let Some((a, b, z)) = &pair {
            match z {
                Some(z) => println!("{a} ~ {b}: conjugate via z = {}", fmt_matrix(z)),
                None => println!("{a} !~ {b}: not twisted-conjugate"),
            }
        }
    }
    run_expects(&g.expects, |e| {
        if e == "conjugate" {
            return Ok(matches!(&pair, Some((_, _, Some(_)))));
        }
        if e == "not-conjugate" {
            return Ok(matches!(&pair, Some((_, _, None))));
        }
        if let Some(n) = e.strip_prefix("index:") {
            if n == "inf" {
                return Ok(h.index.is_infinite());
            }
            let want: u64 = n
                .parse()
                .map_err(|_| usage(format!("bad expectation {e:?}")))?;
            return Ok(h.index == ReidNumber::finite(want));
        }
        Err(usage(format!("unknown expectation {e:?} for hsub")))
    })
}
