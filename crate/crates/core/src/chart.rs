//! Bigraded dimension charts: a plain-text grid, an SVG rendering of the
//! same grid, and TSV rows `m, k, dim, tag`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::grmod::{BiDegree, DimTable, GradedSpace, Window};

/// Dimensions per degree, split by tag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    pub title: String,
    pub region: Window,
    pub cells: BTreeMap<BiDegree, BTreeMap<String, usize>>,
}

impl Chart {
    pub fn new(title: &str, region: Window) -> Chart {
        Chart {
            title: title.to_string(),
            region,
            cells: BTreeMap::new(),
        }
    }

    /// Adds a dimension table under `tag`, clipped to the region.
    pub fn add(&mut self, tag: &str, table: &DimTable) -> &mut Self {
        for (d, n) in &table.dims {
            if self.region.contains(*d) && *n > 0 {
                *self
                    .cells
                    .entry(*d)
                    .or_default()
                    .entry(tag.to_string())
                    .or_default() += n;
            }
        }
        self
    }

    pub fn add_space(&mut self, tag: &str, space: &GradedSpace) -> &mut Self {
        let t = DimTable::of_space(space, self.region);
        self.add(tag, &t)
    }

    pub fn from_table(title: &str, table: &DimTable) -> Chart {
        let mut c = Chart::new(title, table.region);
        c.add("", table);
        c
    }

    pub fn dim(&self, d: BiDegree) -> usize {
        self.cells.get(&d).map_or(0, |t| t.values().sum())
    }

    /// Grid with twist `k` decreasing down the rows and `m` increasing
    /// across; `.` marks zero.
    pub fn to_txt(&self) -> String {
        let w = self.region;
        let width = self
            .cells
            .keys()
            .map(|d| self.dim(*d).to_string().len())
            .max()
            .unwrap_or(1)
            .max(w.m_hi.to_string().len())
            .max(w.m_lo.to_string().len());
        let mut s = String::new();
        writeln!(s, "# {}", self.title).expect("string write");
        for k in (w.k_lo..=w.k_hi).rev() {
            write!(s, "{k:>4} |").expect("string write");
            for m in w.m_lo..=w.m_hi {
                let n = self.dim(BiDegree::new(m, k));
                let cell = if n == 0 {
                    ".".to_string()
                } else {
                    n.to_string()
                };
                write!(s, " {cell:>width$}").expect("string write");
            }
            s.push('\n');
        }
        write!(s, "{:>4} +", "k/m").expect("string write");
        for m in w.m_lo..=w.m_hi {
            write!(s, " {m:>width$}").expect("string write");
        }
        s.push('\n');
        s
    }

    /// One row per nonzero `(degree, tag)`.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("m\tk\tdim\ttag\n");
        for (d, tags) in &self.cells {
            for (tag, n) in tags {
                writeln!(s, "{}\t{}\t{n}\t{tag}", d.m, d.k).expect("string write");
            }
        }
        s
    }

    pub fn to_svg(&self) -> String {
        const CELL: i32 = 24;
        const MARGIN: i32 = 40;
        let w = self.region;
        let cols = w.m_hi - w.m_lo + 1;
        let rows = w.k_hi - w.k_lo + 1;
        let (width, height) = (2 * MARGIN + cols * CELL, 2 * MARGIN + rows * CELL);
        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="monospace" font-size="11">"#
        )
        .expect("string write");
        writeln!(s, r#"<title>{}</title>"#, escape(&self.title)).expect("string write");
        writeln!(
            s,
            r#"<rect width="{width}" height="{height}" fill="white"/>"#
        )
        .expect("string write");
        let x_of = |m: i32| MARGIN + (m - w.m_lo) * CELL;
        let y_of = |k: i32| MARGIN + (w.k_hi - k) * CELL;
        for m in w.m_lo..=w.m_hi {
            let x = x_of(m);
            writeln!(
                s,
                r##"<line x1="{x}" y1="{MARGIN}" x2="{x}" y2="{}" stroke="#ddd"/>"##,
                height - MARGIN
            )
            .expect("string write");
            writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle">{m}</text>"#,
                x + CELL / 2,
                height - MARGIN + 14
            )
            .expect("string write");
        }
        for k in w.k_lo..=w.k_hi {
            let y = y_of(k);
            writeln!(
                s,
                r##"<line x1="{MARGIN}" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/>"##,
                width - MARGIN
            )
            .expect("string write");
            writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="end">{k}</text>"#,
                MARGIN - 4,
                y + CELL / 2 + 4
            )
            .expect("string write");
        }
        for d in self.cells.keys() {
            let n = self.dim(*d);
            let (x, y) = (x_of(d.m), y_of(d.k));
            writeln!(
                s,
                r##"<rect x="{}" y="{}" width="{}" height="{}" fill="#cfe3ff" stroke="#4a78b5"/>"##,
                x + 2,
                y + 2,
                CELL - 4,
                CELL - 4
            )
            .expect("string write");
            writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle">{n}</text>"#,
                x + CELL / 2,
                y + CELL / 2 + 4
            )
            .expect("string write");
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closedform::{dim_table, hp_dim};
    use crate::grmod::bd;

    #[test]
    fn hp_chart_grid() {
        let w = Window::new(-12, 12, -8, 8);
        let c = Chart::from_table("HP", &dim_table(w, hp_dim));
        let txt = c.to_txt();
        for d in [bd(0, 0), bd(4, 1), bd(1, 1), bd(8, 0)] {
            assert_eq!(c.dim(d), 1, "{d}");
        }
        // row of twist 0 is the 9th line after the title
        let row: Vec<&str> = txt.lines().nth(1 + 8).unwrap().split_whitespace().collect();
        assert_eq!(row[0], "0");
        assert_eq!(row[2 + 12], "1");
        assert!(c.to_tsv().contains("4\t1\t1\t\n"));
        let svg = c.to_svg();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }
}
