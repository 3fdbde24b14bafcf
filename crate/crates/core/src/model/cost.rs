use super::DblpError;

/// Straight-line annualization of a purchase over its lifetime.
pub fn annualize_fixed(purchase_cost: f64, lifetime_years: u32) -> Result<f64, DblpError> {
    if lifetime_years == 0 {
        return Err(DblpError::InvalidArgument("lifetime must be at least one year".into()));
    }
    Ok(purchase_cost / f64::from(lifetime_years))
}

/// Yearly cost of `collections_per_year` tours whose cost grows by
/// `growth_rate` each year, averaged over the lifetime.
pub fn annualize_operational(
    per_tour_cost: f64,
    collections_per_year: f64,
    growth_rate: f64,
    lifetime_years: u32,
) -> f64 {
    if lifetime_years == 0 {
        return per_tour_cost * collections_per_year;
    }
    let mut multiplier = 0.0;
    let mut factor = 1.0;
    for _ in 0..lifetime_years {
        multiplier += factor;
        factor *= 1.0 + growth_rate;
    }
    per_tour_cost * collections_per_year * multiplier / f64::from(lifetime_years)
}

/// Cost of one traversal: staff time for the whole team plus mileage.
pub fn edge_cost_from_travel(
    duration_minutes: f64,
    speed_mph: f64,
    hourly_rate: f64,
    team_size: u32,
    mileage_rate: f64,
) -> f64 {
    let hours = duration_minutes / 60.0;
    hours * hourly_rate * f64::from(team_size) + hours * speed_mph * mileage_rate
}
