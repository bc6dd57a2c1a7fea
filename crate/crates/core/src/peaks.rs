//! 1D peak picking with the conventional four-condition semantics: local
//! maxima (plateaus report their midpoint), then filters applied in the
//! fixed order height, distance (greedy, keeping higher peaks), topographic
//! prominence, width at a fraction of the prominence.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakParams {
    pub height: Option<f64>,
    /// Minimal index separation between kept peaks.
    pub distance: Option<usize>,
    pub prominence: Option<f64>,
    /// Minimal peak width measured at `rel_height` of the prominence below
    /// the apex.
    pub width: Option<f64>,
    pub rel_height: f64,
}

impl Default for PeakParams {
    fn default() -> Self {
        PeakParams {
            height: None,
            distance: None,
            prominence: None,
            width: None,
            rel_height: 0.5,
        }
    }
}

impl PeakParams {
    /// Confidence-curve parameters used throughout the sweep stage.
    pub fn confidence(height: f64) -> Self {
        PeakParams {
            height: Some(height),
            distance: Some(4),
            prominence: Some(0.5),
            width: Some(2.0),
            rel_height: 0.5,
        }
    }
}

/// All strict local maxima; a flat-topped run reports its midpoint
/// (left-biased for even plateaus). Endpoints cannot be peaks.
pub fn local_maxima(x: &[f64]) -> Vec<usize> {
    let n = x.len();
    let mut peaks = Vec::new();
    let mut i = 1usize;
    while n >= 3 && i < n - 1 {
        if x[i - 1] < x[i] {
            // Find the end of a possible plateau.
            let mut ahead = i + 1;
            while ahead < n - 1 && x[ahead] == x[i] {
                ahead += 1;
            }
            if x[ahead] < x[i] {
                let right_edge = ahead - 1;
                peaks.push((i + right_edge) / 2);
                i = ahead;
                continue;
            }
            i = ahead;
        } else {
            i += 1;
        }
    }
    peaks
}

/// Greedy distance filter: visit peaks from highest to lowest and drop any
/// not-yet-kept peak closer than `distance` to a kept one.
fn select_by_distance(peaks: &[usize], x: &[f64], distance: usize) -> Vec<bool> {
    let m = peaks.len();
    let mut keep = vec![true; m];
    // Sort peak order by value ascending, stable; iterate descending.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| {
        x[peaks[a]]
            .partial_cmp(&x[peaks[b]])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for &j in order.iter().rev() {
        if !keep[j] {
            continue;
        }
        // Remove neighbors within the exclusion zone on both sides.
        let mut k = j;
        while k > 0 {
            k -= 1;
            if peaks[j] - peaks[k] >= distance {
                break;
            }
            keep[k] = false;
        }
        let mut k = j + 1;
        while k < m {
            if peaks[k] - peaks[j] >= distance {
                break;
            }
            keep[k] = false;
            k += 1;
        }
    }
    keep
}

/// Topographic prominence of one peak plus its two bases (the minima
/// between the peak and the nearest higher ground on each side, or the
/// signal edge).
pub fn peak_prominence(x: &[f64], peak: usize) -> (f64, usize, usize) {
    let mut left_base = peak;
    let mut min_left = x[peak];
    let mut i = peak;
    while i > 0 {
        i -= 1;
        if x[i] > x[peak] {
            break;
        }
        if x[i] < min_left {
            min_left = x[i];
            left_base = i;
        }
    }
    let mut right_base = peak;
    let mut min_right = x[peak];
    let mut i = peak;
    while i + 1 < x.len() {
        i += 1;
        if x[i] > x[peak] {
            break;
        }
        if x[i] < min_right {
            min_right = x[i];
            right_base = i;
        }
    }
    (x[peak] - min_left.max(min_right), left_base, right_base)
}

/// Interpolated width of one peak at `rel_height` of its prominence, with
/// the crossing search bounded by the prominence bases.
pub fn peak_width(x: &[f64], peak: usize, rel_height: f64) -> f64 {
    let (prominence, left_base, right_base) = peak_prominence(x, peak);
    let h = x[peak] - prominence * rel_height;
    let mut i = peak;
    while i > left_base && h < x[i] {
        i -= 1;
    }
    let mut left_ip = i as f64;
    if x[i] < h {
        left_ip += (h - x[i]) / (x[i + 1] - x[i]);
    }
    let mut i = peak;
    while i < right_base && h < x[i] {
        i += 1;
    }
    let mut right_ip = i as f64;
    if x[i] < h {
        right_ip -= (h - x[i]) / (x[i - 1] - x[i]);
    }
    right_ip - left_ip
}

/// Peak indices satisfying every configured condition, ascending.
pub fn find_peaks(x: &[f64], params: &PeakParams) -> Vec<usize> {
    let mut peaks = local_maxima(x);
    if let Some(h) = params.height {
        peaks.retain(|&p| x[p] >= h);
    }
    if let Some(d) = params.distance {
        let keep = select_by_distance(&peaks, x, d);
        peaks = peaks
            .into_iter()
            .zip(keep)
            .filter_map(|(p, k)| k.then_some(p))
            .collect();
    }
    if let Some(pmin) = params.prominence {
        peaks.retain(|&p| peak_prominence(x, p).0 >= pmin);
    }
    if let Some(wmin) = params.width {
        peaks.retain(|&p| peak_width(x, p, params.rel_height) >= wmin);
    }
    peaks
}
