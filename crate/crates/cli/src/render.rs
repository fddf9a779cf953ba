//! Text, JSON and CSV renderings. Every number goes through [`sig`] so the
//! three formats carry the same values.

use std::collections::BTreeSet;

use dpdm::experiments::ResultRow;
use dpdm::verification::PropertyReport;
use dpdm::{AuctionOutcome, BuyerId, CriticalTree, WinDistribution};
use serde_json::{json, Value};

use crate::Format;

const SIG_DIGITS: usize = 12;

/// `x` to 12 significant digits with trailing zeros dropped, in the style
/// of C's `%.12g` but without zero-padded exponents.
pub fn sig(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim(mantissa.to_string()))
    }
}

fn trim(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// JSON number carrying exactly the digits [`sig`] prints.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::String(sig(x));
    }
    let rounded: f64 = sig(x).parse().expect("sig output parses");
    json!(rounded)
}

fn json_text(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values serialize") + "\n"
}

pub fn tree(t: &CriticalTree, unreachable: &BTreeSet<BuyerId>, format: Format) -> String {
    let rows: Vec<(BuyerId, BuyerId, u32)> = t
        .reachable()
        .map(|id| (id, t.parent(id).expect("reachable"), t.depth(id).expect("reachable")))
        .collect();
    match format {
        Format::Text => {
            let mut out = String::from("id\tparent\tdepth\n");
            for (id, parent, depth) in &rows {
                out += &format!("{id}\t{parent}\t{depth}\n");
            }
            out += &format!("d_max\t{}\n", t.d_max());
            if !unreachable.is_empty() {
                let ids: Vec<String> = unreachable.iter().map(|b| b.to_string()).collect();
                out += &format!("unreachable\t{}\n", ids.join(" "));
            }
            out
        }
        Format::Json => json_text(&json!({
            "nodes": rows
                .iter()
                .map(|(id, parent, depth)| json!({"id": id.0, "parent": parent.0, "depth": depth}))
                .collect::<Vec<_>>(),
            "d_max": t.d_max(),
            "unreachable": unreachable.iter().map(|b| b.0).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut out = String::from("id,parent,depth,d_max\n");
            for (id, parent, depth) in &rows {
                out += &format!("{id},{parent},{depth},{}\n", t.d_max());
            }
            out
        }
    }
}

pub fn dist(d: &WinDistribution, epsilon: f64, a: Option<f64>, format: Format) -> String {
    match format {
        Format::Text => {
            let mut out = format!("mechanism\t{}\nepsilon\t{}\n", d.mechanism, sig(epsilon));
            if let Some(a) = a {
                out += &format!("a\t{}\n", sig(a));
            }
            for (id, p) in &d.prob {
                out += &format!("{id}\t{}\n", sig(*p));
            }
            out += &format!("no_sale\t{}\n", sig(d.no_sale));
            out
        }
        Format::Json => {
            let prob: serde_json::Map<String, Value> =
                d.prob.iter().map(|(id, p)| (id.to_string(), num(*p))).collect();
            let mut v = serde_json::Map::new();
            v.insert("mechanism".into(), json!(d.mechanism.as_str()));
            v.insert("epsilon".into(), num(epsilon));
            if let Some(a) = a {
                v.insert("a".into(), num(a));
            }
            v.insert("prob".into(), Value::Object(prob));
            v.insert("no_sale".into(), num(d.no_sale));
            json_text(&Value::Object(v))
        }
        Format::Csv => {
            let mut out = String::from("outcome,probability\n");
            for (id, p) in &d.prob {
                out += &format!("{id},{}\n", sig(*p));
            }
            out += &format!("no_sale,{}\n", sig(d.no_sale));
            out
        }
    }
}

pub fn auction(o: &AuctionOutcome, seed: u64, format: Format) -> String {
    let winner = o.winner.map_or("none".to_string(), |w| w.to_string());
    let transfer = |id: &BuyerId| o.transfers.get(id).copied().unwrap_or(0.0);
    let utility = |id: &BuyerId| o.utilities.get(id).copied().unwrap_or(0.0);
    match format {
        Format::Text => {
            let mut out = format!(
                "mechanism\t{}\nseed\t{seed}\nwinner\t{winner}\npayment\t{}\nseller_revenue\t{}\nsocial_welfare\t{}\n",
                o.mechanism,
                sig(o.payment),
                sig(o.seller_revenue),
                sig(o.social_welfare)
            );
            out += "id\tallocation\ttransfer\tutility\n";
            for (id, x) in &o.allocation {
                out += &format!("{id}\t{x}\t{}\t{}\n", sig(transfer(id)), sig(utility(id)));
            }
            out
        }
        Format::Json => json_text(&json!({
            "mechanism": o.mechanism.as_str(),
            "seed": seed,
            "winner": o.winner.map(|w| w.0),
            "payment": num(o.payment),
            "seller_revenue": num(o.seller_revenue),
            "social_welfare": num(o.social_welfare),
            "buyers": o.allocation.iter().map(|(id, x)| json!({
                "id": id.0,
                "allocation": x,
                "transfer": num(transfer(id)),
                "utility": num(utility(id)),
            })).collect::<Vec<_>>(),
        })),
        Format::Csv => {
            let mut out = String::from("id,allocation,transfer,utility\n");
            for (id, x) in &o.allocation {
                out += &format!("{id},{x},{},{}\n", sig(transfer(id)), sig(utility(id)));
            }
            out
        }
    }
}

pub fn reports(reports: &[PropertyReport], format: Format) -> String {
    match format {
        Format::Text => {
            let mut out: String = reports.iter().map(|r| format!("{r}\n")).collect();
            let failed = reports.iter().filter(|r| !r.passed).count();
            out += &format!("{} properties, {failed} failed\n", reports.len());
            out
        }
        Format::Json => json_text(&Value::Array(
            reports
                .iter()
                .map(|r| {
                    json!({
                        "property": r.property,
                        "passed": r.passed,
                        "instances": r.instances,
                        "max_violation": num(r.max_violation),
                        "tolerance": num(r.tolerance),
                        "note": r.note,
                    })
                })
                .collect(),
        )),
        Format::Csv => {
            let mut out = String::from("property,passed,instances,max_violation,tolerance\n");
            for r in reports {
                out += &format!(
                    "{},{},{},{},{}\n",
                    r.property,
                    r.passed,
                    r.instances,
                    sig(r.max_violation),
                    sig(r.tolerance)
                );
            }
            out
        }
    }
}

pub fn rows(rows: &[ResultRow], format: Format) -> String {
    let opt = |x: Option<f64>| x.map_or(String::new(), sig);
    match format {
        Format::Text => {
            let mut out = String::from("dataset\tmechanism\tepsilon\ta\tlaw\tmean_sw\tstderr\tdp_bound\n");
            for r in rows {
                out += &format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                    r.dataset,
                    r.mechanism,
                    sig(r.epsilon),
                    opt(r.a),
                    r.law,
                    sig(r.mean_sw),
                    sig(r.stderr),
                    opt(r.dp_bound)
                );
            }
            out
        }
        Format::Json => json_text(&Value::Array(
            rows.iter()
                .map(|r| {
                    json!({
                        "dataset": r.dataset,
                        "mechanism": r.mechanism.as_str(),
                        "epsilon": num(r.epsilon),
                        "a": r.a.map(num),
                        "law": r.law.as_str(),
                        "mean_sw": num(r.mean_sw),
                        "stderr": num(r.stderr),
                        "dp_bound": r.dp_bound.map(num),
                        "runs": r.runs,
                        "seed": r.seed,
                    })
                })
                .collect(),
        )),
        Format::Csv => {
            let mut out = String::from("dataset,mechanism,epsilon,a,law,mean_sw,stderr,dp_bound,runs,seed\n");
            for r in rows {
                out += &format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    r.dataset,
                    r.mechanism,
                    sig(r.epsilon),
                    opt(r.a),
                    r.law,
                    sig(r.mean_sw),
                    sig(r.stderr),
                    opt(r.dp_bound),
                    r.runs,
                    r.seed
                );
            }
            out
        }
    }
}
