use mudpod::mahalanobis::{covariance, mahalanobis_distances, whitening_factor, whitening_residual};
use mudpod::Dataset;

fn main() -> mudpod::Result<()> {
    // Strongly correlated 2D cloud.
    let rows: Vec<Vec<f64>> = (0..200)
        .map(|i| {
            let t = i as f64 / 20.0;
            vec![t, 2.0 * t + (i as f64 * 0.7).sin()]
        })
        .collect();
    let data = Dataset::from_rows(&rows)?;
    let sigma = covariance(&data)?;
    let w = whitening_factor(&sigma)?;
    println!("covariance:{sigma}");
    println!("ridge {:.2e}, residual |W S W' - I| = {:.2e}", w.ridge(), whitening_residual(&sigma, &w));

    let white = w.whiten(&data)?;
    println!("covariance after whitening:{}", covariance(&white)?);

    let d = mahalanobis_distances(&data, data.row(0), &w, Some(0))?;
    println!("distance from row 0 to rows 1..5: {:.3?}", &d[..5]);
    Ok(())
}
