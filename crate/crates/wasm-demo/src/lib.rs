//! Browser bindings. Every export returns a string (SVG or JSON) so the
//! page needs no generated TypeScript types; errors surface as JS exceptions.

use serde_json::json;
use wasm_bindgen::prelude::*;

use ortho_trades::dissection::{check_good, dissection_to_trade, good_dissection, render_svg, small_rowperm_pipeline};
use ortho_trades::family::construct;
use ortho_trades::modular::Modulus;

fn js(e: ortho_trades::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn prime(p: u32) -> Result<Modulus, ortho_trades::Error> {
    Modulus::prime(p)
}

/// SVG of the good dissection of the `n x (n + 3)` rectangle.
pub fn dissection_svg_inner(n: u32) -> Result<String, ortho_trades::Error> {
    let d = good_dissection(u64::from(n))?;
    debug_assert!(check_good(&d).is_good());
    Ok(render_svg(&d))
}

/// `{"p","k","size","trade","intercalate"}` for the intercalate family.
pub fn family_json_inner(p: u32) -> Result<String, ortho_trades::Error> {
    let w = construct(prime(p)?)?;
    Ok(json!({
        "p": p,
        "k": w.k,
        "size": w.trade.size(),
        "trade": w.trade,
        "intercalate": w.intercalate,
    })
    .to_string())
}

/// `{"p","moved_rows","size","symbol_twice_size","trade"}` for the
/// row-permutation pipeline.
pub fn rowperm_json_inner(p: u32) -> Result<String, ortho_trades::Error> {
    let p = prime(p)?;
    let (sigma, t) = small_rowperm_pipeline(p)?;
    let twice = if p.get() >= 11 {
        Some(dissection_to_trade(&good_dissection(u64::from((p.get() - 3) / 2))?)?.size())
    } else {
        None
    };
    Ok(json!({
        "p": p,
        "moved_rows": sigma.support(),
        "size": t.size(),
        "symbol_twice_size": twice,
        "trade": t,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn dissection_svg(n: u32) -> Result<String, JsError> {
    dissection_svg_inner(n).map_err(js)
}

#[wasm_bindgen]
pub fn family_json(p: u32) -> Result<String, JsError> {
    family_json_inner(p).map_err(js)
}

#[wasm_bindgen]
pub fn rowperm_json(p: u32) -> Result<String, JsError> {
    rowperm_json_inner(p).map_err(js)
}
