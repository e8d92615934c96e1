use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::Value;
use teichlab::charts::{AChart, XChart};
use teichlab::laminations::CurvePath;
use teichlab::semifield::{PosFloat, PosRat, SemifieldTag, TropQ, TropR, TropZ};
use teichlab::surface::Triangulation;

/// A chart of either type over any of the five semifields.
pub enum Chart {
    XPosRat(XChart<PosRat>),
    XPosFloat(XChart<PosFloat>),
    XTropQ(XChart<TropQ>),
    XTropZ(XChart<TropZ>),
    XTropR(XChart<TropR>),
    APosRat(AChart<PosRat>),
    APosFloat(AChart<PosFloat>),
    ATropQ(AChart<TropQ>),
    ATropZ(AChart<TropZ>),
    ATropR(AChart<TropR>),
}

/// Runs the same expression on whichever chart is inside.
#[macro_export]
macro_rules! with_chart {
    ($c:expr, |$x:ident| $body:expr) => {
        match $c {
            $crate::input::Chart::XPosRat($x) => $body,
            $crate::input::Chart::XPosFloat($x) => $body,
            $crate::input::Chart::XTropQ($x) => $body,
            $crate::input::Chart::XTropZ($x) => $body,
            $crate::input::Chart::XTropR($x) => $body,
            $crate::input::Chart::APosRat($x) => $body,
            $crate::input::Chart::APosFloat($x) => $body,
            $crate::input::Chart::ATropQ($x) => $body,
            $crate::input::Chart::ATropZ($x) => $body,
            $crate::input::Chart::ATropR($x) => $body,
        }
    };
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{} is not valid JSON", path.display()))
}

pub fn load_surface(path: &Path) -> Result<Triangulation> {
    let v = read_json(path)?;
    // a chart file carries its surface
    let v = v.get("surface").cloned().unwrap_or(v);
    Ok(Triangulation::from_json(&v)?)
}

pub fn chart_from_json(mut v: Value, tag: Option<SemifieldTag>) -> Result<Chart> {
    if let Some(tag) = tag {
        v["semifield"] = Value::String(tag.name().into());
    }
    let tag: SemifieldTag = match v.get("semifield").and_then(Value::as_str) {
        Some(s) => s.parse()?,
        None => bail!("chart has no semifield; pass --semifield"),
    };
    let ty = v.get("type").and_then(Value::as_str).unwrap_or("");
    Ok(match (ty, tag) {
        ("X", SemifieldTag::PosRat) => Chart::XPosRat(XChart::from_json(&v)?),
        ("X", SemifieldTag::PosFloat) => Chart::XPosFloat(XChart::from_json(&v)?),
        ("X", SemifieldTag::TropQ) => Chart::XTropQ(XChart::from_json(&v)?),
        ("X", SemifieldTag::TropZ) => Chart::XTropZ(XChart::from_json(&v)?),
        ("X", SemifieldTag::TropR) => Chart::XTropR(XChart::from_json(&v)?),
        ("A", SemifieldTag::PosRat) => Chart::APosRat(AChart::from_json(&v)?),
        ("A", SemifieldTag::PosFloat) => Chart::APosFloat(AChart::from_json(&v)?),
        ("A", SemifieldTag::TropQ) => Chart::ATropQ(AChart::from_json(&v)?),
        ("A", SemifieldTag::TropZ) => Chart::ATropZ(AChart::from_json(&v)?),
        ("A", SemifieldTag::TropR) => Chart::ATropR(AChart::from_json(&v)?),
        _ => bail!("chart type must be \"X\" or \"A\", got {ty:?}"),
    })
}

pub fn load_chart(path: &Path, tag: Option<SemifieldTag>) -> Result<Chart> {
    chart_from_json(read_json(path)?, tag)
}

/// One curve object, an array of them, or an object with `components`.
pub fn load_curves(path: &Path) -> Result<Vec<CurvePath>> {
    let v = read_json(path)?;
    let list = match &v {
        Value::Array(a) => a.clone(),
        Value::Object(o) if o.contains_key("components") => v["components"].as_array().cloned().unwrap_or_default(),
        _ => vec![v],
    };
    Ok(list.iter().map(CurvePath::from_json).collect::<teichlab::Result<_>>()?)
}

pub fn load_curve(path: &Path) -> Result<CurvePath> {
    let mut cs = load_curves(path)?;
    if cs.len() != 1 {
        bail!("{} holds {} curves, expected one", path.display(), cs.len());
    }
    Ok(cs.remove(0))
}
