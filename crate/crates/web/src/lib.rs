//! WebAssembly entry points for the static demo page in `www/`.
//! Each operation returns text (a TSV table, a text grid or an SVG chart).

use wasm_bindgen::prelude::wasm_bindgen;
use wasm_bindgen::JsValue;

use krcore::a1mod::std_pn;
use krcore::chart::Chart;
use krcore::closedform::{dim_table, hp_dim};
use krcore::grmod::Window;
use krcore::krassembly::{assemble_kr, bv_top};
use krcore::rfun::apply_r;

/// Largest window edge accepted from the page, to keep the browser responsive.
pub const MAX_EDGE: i32 = 40;

fn window(m_lo: i32, m_hi: i32, k_lo: i32, k_hi: i32) -> Result<Window, String> {
    let w = Window::new(m_lo, m_hi, k_lo, k_hi);
    if w.is_empty() {
        return Err(format!("window {m_lo} {m_hi} {k_lo} {k_hi} is empty"));
    }
    if [m_lo, m_hi, k_lo, k_hi].iter().any(|x| x.abs() > MAX_EDGE) {
        return Err(format!(
            "window edges must lie in [-{MAX_EDGE}, {MAX_EDGE}]"
        ));
    }
    Ok(w)
}

fn render(c: &Chart, format: &str) -> Result<String, String> {
    match format {
        "tsv" => Ok(c.to_tsv()),
        "txt" => Ok(c.to_txt()),
        "svg" => Ok(c.to_svg()),
        f => Err(format!("unknown format {f} (expected tsv, txt or svg)")),
    }
}

/// Brute-force `H01(R P_n)` on a window.
pub fn h01_pn(n: i32, w: Window, format: &str) -> Result<String, String> {
    let m = std_pn(n, bv_top(w) + 12);
    let h = apply_r(&m, w).map_err(|e| e.to_string())?.total.h01();
    let mut c = Chart::new(&format!("H01(R P_{n}) on {}", h.region), h.region);
    c.add("H01", &h.dims());
    render(&c, format)
}

/// The closed-form module `HP` on a window.
pub fn hp(w: Window, format: &str) -> Result<String, String> {
    let mut c = Chart::new("HP", w);
    c.add("HP", &dim_table(w, hp_dim));
    render(&c, format)
}

/// The assembled `kR` report of `BV_n`: TSV rows, or a chart of the parts.
pub fn kr(n: u32, w: Window, layers: usize, format: &str) -> Result<String, String> {
    if !(1..=3).contains(&n) {
        return Err("rank must be 1, 2 or 3 in the browser".into());
    }
    let r = assemble_kr(n, w, layers).map_err(|e| e.to_string())?;
    if format == "tsv" {
        return Ok(r.to_tsv());
    }
    let mut c = Chart::new(&format!("kR of BV{n} on {}", r.region), r.region);
    for (p, s) in r.parts() {
        c.add_space(&p.tag(), s);
    }
    render(&c, format)
}

#[wasm_bindgen]
pub fn h01_chart(
    n: i32,
    m_lo: i32,
    m_hi: i32,
    k_lo: i32,
    k_hi: i32,
    format: &str,
) -> Result<String, JsValue> {
    window(m_lo, m_hi, k_lo, k_hi)
        .and_then(|w| h01_pn(n, w, format))
        .map_err(JsValue::from)
}

#[wasm_bindgen]
pub fn hp_chart(
    m_lo: i32,
    m_hi: i32,
    k_lo: i32,
    k_hi: i32,
    format: &str,
) -> Result<String, JsValue> {
    window(m_lo, m_hi, k_lo, k_hi)
        .and_then(|w| hp(w, format))
        .map_err(JsValue::from)
}

#[wasm_bindgen]
pub fn kr_report(
    n: u32,
    m_lo: i32,
    m_hi: i32,
    k_lo: i32,
    k_hi: i32,
    layers: u32,
    format: &str,
) -> Result<String, JsValue> {
    window(m_lo, m_hi, k_lo, k_hi)
        .and_then(|w| kr(n, w, layers as usize, format))
        .map_err(JsValue::from)
}

#[cfg(test)]
mod tests {
    use super::*;
    use krcore::grmod::bd;

    #[test]
    fn hp_grid_has_the_expected_classes() {
        let w = Window::new(-12, 12, -8, 8);
        let tsv = hp(w, "tsv").unwrap();
        for d in [bd(0, 0), bd(4, 1), bd(1, 1), bd(8, 0)] {
            assert!(tsv.contains(&format!("\n{}\t{}\t1\tHP\n", d.m, d.k)), "{d}");
        }
        assert!(hp(w, "svg").unwrap().starts_with("<svg"));
    }

    #[test]
    fn h01_of_p0_at_twist_zero_is_its_socle() {
        let w = window(-8, 8, -4, 4).unwrap();
        let tsv = h01_pn(0, w, "tsv").unwrap();
        // Soc(P_0) is spanned by the powers x^{4j}, j ≥ 0
        for m in -4..=4 {
            let row = format!("\n{m}\t0\t1\tH01\n");
            assert_eq!(tsv.contains(&row), m >= 0 && m % 4 == 0, "{m}");
        }
        assert!(h01_pn(0, w, "txt").unwrap().starts_with("# H01(R P_0) on "));
    }

    #[test]
    fn kr_report_rows_and_chart() {
        let w = window(-12, 12, -6, 6).unwrap();
        assert!(kr(1, w, 1, "tsv")
            .unwrap()
            .starts_with("m\tk\tdim\tpart\tannotations\n"));
        assert!(kr(1, w, 1, "txt").unwrap().starts_with("# kR of BV1 on "));
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(window(3, 1, 0, 0).is_err());
        assert!(window(-100, 1, 0, 0).is_err());
        assert!(hp(Window::new(0, 1, 0, 0), "png").is_err());
        assert!(kr(7, Window::new(0, 1, 0, 0), 1, "tsv").is_err());
    }
}
