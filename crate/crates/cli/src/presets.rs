//! Built-in experiment configurations. A config file can start from one of
//! these with `preset = "<name>"` and override individual keys.

pub struct Preset {
    pub name: &'static str,
    pub about: &'static str,
    pub toml: &'static str,
}

const FIGURE_MARKET: &str = r#"
[solver]
radius = "auto"
n = 201

[output]
csv = true
image = true
scale = 3
"#;

macro_rules! figure {
    ($name:expr, $about:expr, $sigma:expr, $lambda:expr) => {
        Preset {
            name: $name,
            about: $about,
            toml: concat!(
                "[market]\nmu = [0.08, 0.08]\nr = 0.03\nbeta = 0.1\np = 0.5\nepsilon = 0.01\nalpha_source = \"sigma\"\nsigma = ",
                $sigma,
                "\nlambda = ",
                $lambda,
                "\n"
            ),
        }
    };
}


pub const PRESETS: &[Preset] = &[
    Preset {
        name: "oracle-1d",
        about: "one asset, sigma = alpha_bar = 1, costs 0.001 both ways; checked against the closed form",
        toml: r#"
[market]
mu = [0.08]
r = 0.03
sigma = [[1.0]]
beta = 0.1
p = 0.5
epsilon = 0.01
alpha_source = "sigma"
lambda = [[0.0, 0.001], [0.001, 0.0]]

[solver]
radius = "auto"
n = 141
mode = "both"
eta = 1e-3

[validation]
mc = true
horizon = 2e4
dt = 1e-3
"#,
    },
    Preset {
        name: "separable-2d",
        about: "two uncorrelated assets, cash-only costs 0.001; product of two one-asset solutions",
        toml: r#"
[market]
mu = [0.08, 0.08]
r = 0.03
sigma = [[1.0, 0.0], [0.0, 1.0]]
beta = 0.1
p = 0.5
epsilon = 0.01
alpha_source = "sigma"
lambda = [[0.0, 0.001, 0.001], [0.001, 0.0, inf], [0.001, inf, 0.0]]

[solver]
radius = "auto"
n = 121
"#,
    },
    Preset {
        name: "zero-cost",
        about: "one asset with free transfers; eigenvalue zero and no no-transaction region",
        toml: r#"
[market]
mu = [0.08]
r = 0.03
sigma = [[1.0]]
beta = 0.1
p = 0.5
epsilon = 0.01
alpha_source = "sigma"
lambda = [[0.0, 0.0], [0.0, 0.0]]

[solver]
radius = 0.35
n = 41
check_domain = false
"#,
    },
    Preset {
        name: "merton-2d",
        about: "two assets with alpha_bar from the Merton solution (mu = 0.07/0.05, r = 0.02, p = 0.3)",
        toml: r#"
[market]
mu = [0.07, 0.05]
r = 0.02
sigma = [[0.25, 0.05], [-0.03, 0.2]]
beta = 0.08
p = 0.3
epsilon = 0.05
alpha_source = "merton"
lambda = [[0.0, 0.001, 0.002], [0.001, 0.0, inf], [0.002, inf, 0.0]]

[solver]
radius = "auto"
n = 101
"#,
    },
    figure!("fig-uncorrelated", "cash-only costs lambda_0, sigma_0 = I: rectangular NT region", "[[1.0, 0.0], [0.0, 1.0]]",
        "[[0.0, 0.001, 0.001], [0.001, 0.0, inf], [0.001, inf, 0.0]]"),
    figure!("fig-neg-correlation", "lambda_0, sigma_- (off-diagonal -0.25)", "[[1.0, -0.25], [-0.25, 1.0]]",
        "[[0.0, 0.001, 0.001], [0.001, 0.0, inf], [0.001, inf, 0.0]]"),
    figure!("fig-pos-correlation", "lambda_0, sigma_+ (off-diagonal +0.25)", "[[1.0, 0.25], [0.25, 1.0]]",
        "[[0.0, 0.001, 0.001], [0.001, 0.0, inf], [0.001, inf, 0.0]]"),
    figure!("fig-higher-corr", "lambda_0, sigma_-- (entries -0.25 / -0.1)", "[[1.0, -0.25], [-0.1, 1.0]]",
        "[[0.0, 0.001, 0.001], [0.001, 0.0, inf], [0.001, inf, 0.0]]"),
    figure!("fig-higher-corr-pos", "lambda_0, sigma_++ (entries 0.25 / 0.1)", "[[1.0, 0.25], [0.1, 1.0]]",
        "[[0.0, 0.001, 0.001], [0.001, 0.0, inf], [0.001, inf, 0.0]]"),
    figure!("fig-asymmetric", "lambda' (cash legs 0.001 / 0.002), sigma_0: thinner band for the cheaper asset", "[[1.0, 0.0], [0.0, 1.0]]",
        "[[0.0, 0.001, 0.002], [0.001, 0.0, inf], [0.002, inf, 0.0]]"),
    figure!("fig-all-uncorrelated", "all transfers at 0.001, sigma_0: asset swaps appear, NT loses convexity", "[[1.0, 0.0], [0.0, 1.0]]",
        "[[0.0, 0.001, 0.001], [0.001, 0.0, 0.001], [0.001, 0.001, 0.0]]"),
    figure!("fig-all-neg-correlation", "all transfers at 0.001, sigma_-", "[[1.0, -0.25], [-0.25, 1.0]]",
        "[[0.0, 0.001, 0.001], [0.001, 0.0, 0.001], [0.001, 0.001, 0.0]]"),
    figure!("fig-all-pos-correlation", "all transfers at 0.001, sigma_+", "[[1.0, 0.25], [0.25, 1.0]]",
        "[[0.0, 0.001, 0.001], [0.001, 0.0, 0.001], [0.001, 0.001, 0.0]]"),
    figure!("fig-all-asymmetric", "all transfers, cash <-> asset 1 at 0.002 and the rest at 0.001, sigma_0", "[[1.0, 0.0], [0.0, 1.0]]",
        "[[0.0, 0.002, 0.001], [0.002, 0.0, 0.001], [0.001, 0.001, 0.0]]"),
];

pub fn find(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

/// Full TOML text of a preset, figure defaults included.
pub fn source(preset: &Preset) -> String {
    if preset.name.starts_with("fig-") {
        format!("{}{}", preset.toml, FIGURE_MARKET)
    } else {
        preset.toml.to_string()
    }
}
