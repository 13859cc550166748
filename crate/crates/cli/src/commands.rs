use serde_json::{json, Map, Value};
use slag_core::census::{census_with, fit_exponent, to_csv, CensusFit, CensusOptions};
use slag_core::exponents::{delta_chain_with, PipelineConstants};
use slag_core::harish_chandra::{xi_decay_fit_with, MIN_NODES_PER_CIRCLE};
use slag_core::lie::{dimensions, rho_h, rho_h_closed_form, root_datum, IntegrabilityTable};
use slag_core::rational::{parse_fraction, to_f64, to_fraction_string};
use slag_core::{Error, GramLattice, GroupSpec, PositivePlane};

use crate::output::{decimal, json, put_rational, table, Format};
use crate::{CensusArgs, ConstantsArgs, Failure, RootsArgs, Variant, XiArgs};

fn group_spec(p: u32, q: u32) -> Result<GroupSpec, Failure> {
    GroupSpec::new(p, q).map_err(|e| Failure::flag("--p/--q", e))
}

const RATIONAL_KEYS: [&str; 7] =
    ["rho_h", "delta0_prime_sup", "C_l0", "delta0_sup", "d_l0", "delta_section5", "delta_eq22"];

pub fn constants(a: &ConstantsArgs, format: Format) -> Result<String, Failure> {
    let spec = group_spec(a.p, a.q)?;
    let mut consts = PipelineConstants::new(spec);
    if let Some(s) = &a.p_cusp {
        let r = parse_fraction(s).ok_or_else(|| Failure::flag("--p-cusp", format!("expected num/den, got {s:?}")))?;
        consts = consts.with_p_cusp(r).map_err(|e| Failure::flag("--p-cusp", e))?;
    }
    let p_pi = match a.p_pi {
        Some(v) => v,
        None => {
            let table = match &a.pi_table {
                Some(path) => IntegrabilityTable::load(path).map_err(|e| Failure::flag("--pi-table", e))?,
                None => IntegrabilityTable::default(),
            };
            table.get(spec).ok_or_else(|| {
                Failure::flag(
                    "--p/--q",
                    format!("p(pi) not tabulated for SO({},{}); pass --p-pi or --pi-table", spec.p, spec.q),
                )
            })?
        }
    };
    let report = delta_chain_with(&consts, p_pi).map_err(|e| match e {
        Error::InvalidArgument(_) => Failure::flag("--p-pi", e),
        other => Failure::runtime(other),
    })?;

    let Value::Object(mut map) = serde_json::to_value(&report).map_err(Failure::runtime)? else {
        unreachable!("report serializes to an object")
    };
    for key in RATIONAL_KEYS {
        if let Some(Value::String(s)) = map.get(key) {
            let x = parse_fraction(s).map(|r| to_f64(&r)).unwrap_or(f64::NAN);
            map.insert(format!("{key}_decimal"), decimal(x));
        }
    }
    put_rational(&mut map, "p_cusp", &consts.p_cusp);
    let dropped: &[&str] = match a.variant {
        Variant::Both => &[],
        Variant::Section5 => &["delta_eq22", "delta_eq22_decimal"],
        Variant::Eq22 => &["delta_section5", "delta_section5_decimal"],
    };
    for key in dropped {
        map.remove(*key);
    }
    let variant = match a.variant {
        Variant::Both => "both",
        Variant::Section5 => "section5",
        Variant::Eq22 => "eq22",
    };
    map.insert("variant".into(), json!(variant));

    match format {
        Format::Json => json(&map),
        Format::Csv | Format::Table => {
            let rows = flat_rows(&map);
            if format == Format::Csv {
                let mut out = String::from("quantity,value,decimal\n");
                for r in rows {
                    out += &format!("{},{},{}\n", r[0], csv_field(&r[1]), r[2]);
                }
                Ok(out)
            } else {
                Ok(table(&["quantity", "value", "decimal"], &rows))
            }
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `(name, value, decimal)` rows; nested objects are flattened with dots and
/// `_decimal` siblings fold into their rational's row.
fn flat_rows(map: &Map<String, Value>) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    flatten("", map, &mut rows);
    rows
}

fn flatten(prefix: &str, map: &Map<String, Value>, rows: &mut Vec<Vec<String>>) {
    for (key, value) in map {
        if key.ends_with("_decimal") {
            continue;
        }
        let name = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
        match value {
            Value::Object(inner) => flatten(&name, inner, rows),
            Value::String(s) => {
                let dec = map.get(&format!("{key}_decimal")).map(|d| d.to_string()).unwrap_or_default();
                rows.push(vec![name, s.clone(), dec]);
            }
            other => rows.push(vec![name, other.to_string(), String::new()]),
        }
    }
}

pub fn census(a: &CensusArgs, format: Format) -> Result<String, Failure> {
    let lattice = GramLattice::parse(&a.lattice).map_err(|e| Failure::flag("--lattice", e))?;
    let (plane, plane_json, plane_flag) = match &a.plane {
        Some(s) => (PositivePlane::parse(&lattice, s).map_err(|e| Failure::flag("--plane", e))?, json!({ "spec": s }), "--plane"),
        None => (
            PositivePlane::random(&lattice, a.seed).map_err(|e| Failure::flag("--seed", e))?,
            json!({ "seed": a.seed }),
            "--seed",
        ),
    };
    let vs: Vec<f64> = match (&a.v, a.vmax) {
        (Some(v), _) => v.clone(),
        (None, Some(vmax)) => {
            if a.vpoints == 0 {
                return Err(Failure::flag("--vpoints", "must be at least 1"));
            }
            let k = a.vpoints as i32;
            (0..k).map(|i| vmax / 2f64.powi(k - 1 - i)).collect()
        }
        (None, None) => return Err(Failure::flag("--v", "give --v or --vmax")),
    };
    let v_flag = if a.v.is_some() { "--v" } else { "--vmax" };
    let records = census_with(&lattice, &plane, &vs, CensusOptions { record_timing: a.timings }).map_err(|e| match e {
        Error::InvalidArgument(_) => Failure::flag(v_flag, e),
        Error::PlaneDimension { .. } | Error::MajorantNotDefinite => Failure::flag(plane_flag, e),
        other => Failure::runtime(other),
    })?;
    let fit = fit_exponent(&records).ok().map(|f| CensusFit::new(f, lattice.rank()));

    match format {
        Format::Json => {
            let (n_plus, n_minus) = lattice.signature();
            json(&json!({
                "lattice": a.lattice,
                "rank": lattice.rank(),
                "signature": [n_plus, n_minus],
                "plane": plane_json,
                "records": records,
                "fit": fit,
            }))
        }
        Format::Csv => Ok(to_csv(&records)),
        Format::Table => {
            let rows: Vec<Vec<String>> = records
                .iter()
                .map(|r| {
                    vec![
                        r.v.to_string(),
                        r.count.to_string(),
                        r.count_up_to_sign.to_string(),
                        r.enumerated.to_string(),
                        r.elapsed_ms.to_string(),
                    ]
                })
                .collect();
            let mut out = table(&["V", "count", "count_up_to_sign", "enumerated", "elapsed_ms"], &rows);
            match fit {
                Some(f) => {
                    out += &format!(
                        "\nslope {:.6}  intercept {:.6}  r^2 {:.6}  expected {}\n",
                        f.slope, f.intercept, f.r_squared, f.expected_slope
                    )
                }
                None => out += "\nno fit: fewer than 3 bounds with a positive count\n",
            }
            Ok(out)
        }
    }
}

pub fn xi(a: &XiArgs, format: Format) -> Result<String, Failure> {
    let spec = group_spec(a.p, a.q)?;
    if !matches!((spec.p, spec.q), (1, 2) | (2, 2)) {
        let err = slag_core::harish_chandra::QuadratureGrid::new(spec, MIN_NODES_PER_CIRCLE).err();
        let msg = err.map(|e| e.to_string()).unwrap_or_default();
        return Err(Failure::flag("--p/--q", msg));
    }
    if a.nodes < MIN_NODES_PER_CIRCLE {
        return Err(Failure::flag("--nodes", format!("need at least {MIN_NODES_PER_CIRCLE}, got {}", a.nodes)));
    }
    if !(a.t_min >= 4.0) {
        return Err(Failure::flag("--t-min", format!("must be >= 4, got {}", a.t_min)));
    }
    if !(a.t_max > a.t_min) || !a.t_max.is_finite() {
        return Err(Failure::flag("--t-max", format!("must exceed --t-min, got {}", a.t_max)));
    }
    if a.samples < 8 {
        return Err(Failure::flag("--samples", format!("must be >= 8, got {}", a.samples)));
    }
    let report = xi_decay_fit_with(spec, [a.t_min, a.t_max], a.samples, a.nodes).map_err(Failure::runtime)?;

    match format {
        Format::Json => json(&report),
        Format::Csv => {
            // the CSV stays a plain table; the fit goes to stderr
            eprint!("{}", json(&json!({ "fit": report.fit, "rho_h": report.rho_h }))?);
            let mut out = String::from("t,xi,log_xi\n");
            for s in &report.samples {
                out += &format!("{},{},{}\n", s.t, s.xi, s.log_xi);
            }
            Ok(out)
        }
        Format::Table => {
            let rows: Vec<Vec<String>> = report
                .samples
                .iter()
                .map(|s| vec![s.t.to_string(), format!("{:.12e}", s.xi), format!("{:.9}", s.log_xi)])
                .collect();
            let mut out = table(&["t", "xi", "log_xi"], &rows);
            let f = &report.fit;
            out += &format!(
                "\nr {:.6} (log-corrected, r^2 {:.6})  r_pure {:.6} (r^2 {:.6})  rho(H) {}\n",
                f.r, f.log_corrected.r_squared, f.r_pure, f.pure_exponential.r_squared, report.rho_h
            );
            Ok(out)
        }
    }
}

pub fn roots(a: &RootsArgs, format: Format) -> Result<String, Failure> {
    let spec = group_spec(a.p, a.q)?;
    let datum = root_datum(spec);
    let dims = dimensions(spec);
    let with_mult = datum.total_multiplicity();
    let rho = rho_h(spec);

    match format {
        Format::Json => {
            let mut map = Map::new();
            map.insert("spec".into(), json!(spec));
            map.insert("root_type".into(), json!(datum.root_type));
            map.insert("positive_roots".into(), json!(datum.positive_roots));
            map.insert("rho".into(), json!(datum.rho.iter().map(to_fraction_string).collect::<Vec<_>>()));
            put_rational(&mut map, "rho_h", &rho);
            map.insert("rho_h_matches_closed_form".into(), json!(rho == rho_h_closed_form(spec)));
            map.insert(
                "iwasawa_dimensions".into(),
                json!({
                    "dim_k": dims.dim_k,
                    "roots_with_multiplicity": with_mult,
                    "real_rank": spec.p,
                    "dim_g": dims.dim_g,
                    "holds": dims.dim_k + with_mult + spec.p as u64 == dims.dim_g,
                }),
            );
            json(&map)
        }
        Format::Csv | Format::Table => {
            let rows: Vec<Vec<String>> = datum
                .positive_roots
                .iter()
                .map(|r| {
                    let coeffs: Vec<String> = r.coefficients.iter().map(i64::to_string).collect();
                    vec![coeffs.join(" "), r.multiplicity.to_string()]
                })
                .collect();
            if format == Format::Csv {
                let mut out = String::from("coefficients,multiplicity\n");
                for r in rows {
                    out += &format!("{},{}\n", r[0], r[1]);
                }
                Ok(out)
            } else {
                let mut out = table(&["root", "multiplicity"], &rows);
                out += &format!(
                    "\ntype {}  rho(H) {}  dim K + roots + rank = {} + {} + {} = {} (dim G {})\n",
                    datum.root_type,
                    to_fraction_string(&rho),
                    dims.dim_k,
                    with_mult,
                    spec.p,
                    dims.dim_k + with_mult + spec.p as u64,
                    dims.dim_g
                );
                Ok(out)
            }
        }
    }
}
