#include <mchom/media.hpp>

#include <mchom/error.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace mchom {

namespace {

// Position of cell k inside its period, in (0,1).
double phase(int k, int period) { return ((k % period) + 0.5) / period; }

// Band [a,b) with a tolerance that keeps a cell centred exactly on the
// lower edge inside and one centred on the upper edge outside.
bool in_band(double t, double a, double b) { return t > a - 1e-9 && t < b - 1e-9; }

std::vector<double> values_of(const std::vector<double>& kappa, const ContinuumMap& c)
{
    std::vector<double> v(c.num_continua, 0.0);
    for (std::size_t k = 0; k < kappa.size(); ++k)
        v[c.label[k]] = std::max(v[c.label[k]], kappa[k]);
    return v;
}

ContinuumMap layer_labels(const FineGrid& grid, double eps, double fraction, LayerOrientation o)
{
    if (fraction <= 0.0 || fraction >= 1.0)
        config_error("media", "layer volume fraction must lie in (0,1)");
    const int p = cells_per_period(eps, grid);
    const double a = 0.5 - fraction / 2, b = 0.5 + fraction / 2;
    ContinuumMap c;
    c.num_continua = 2;
    c.label.resize(grid.num_cells());
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const double t = phase(o == LayerOrientation::horizontal ? j : i, p);
            c.label[grid.cell(i, j)] = in_band(t, a, b) ? 0 : 1;
        }
    return c;
}

} // namespace

double MediumSpec::contrast() const
{
    auto [lo, hi] = std::minmax_element(kappa.begin(), kappa.end());
    return *hi / *lo;
}

int cells_per_period(double eps, const FineGrid& grid)
{
    if (!(eps > 0.0) || eps > 1.0)
        config_error("media", "period must lie in (0,1]");
    const double inv = 1.0 / eps;
    if (std::abs(inv - std::round(inv)) > 1e-9)
        config_error("media", "period must divide the unit square");
    const double p = eps * grid.nx;
    if (std::abs(p - std::round(p)) > 1e-9)
        config_error("media", "fine grid does not align with the period");
    const int pi = static_cast<int>(std::lround(p));
    if (pi < 8)
        config_error("media", "period resolved by " + std::to_string(pi) + " cells, need at least 8");
    return pi;
}

double low_kappa(double eps) { return eps / 10000.0; }
double high_kappa(double eps) { return 1.0 / (100.0 * eps); }

double gaussian_bump(double x, double y)
{
    return std::exp(-40.0 * std::abs((x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5)));
}

MediumSpec make_layered(const FineGrid& grid, double eps, double kappa_low, double kappa_high,
                        const GeometryOptions& opts)
{
    if (!(kappa_low > 0.0) || !(kappa_high > 0.0))
        config_error("media", "coefficient values must be positive");
    MediumSpec m;
    m.eps = eps;
    m.grid = grid;
    m.continua = layer_labels(grid, eps, opts.fraction < 0 ? 0.5 : opts.fraction, opts.orientation);
    m.kappa.resize(grid.num_cells());
    for (int k = 0; k < grid.num_cells(); ++k)
        m.kappa[k] = m.continua.label[k] == 0 ? kappa_low : kappa_high;
    m.values = {kappa_low, kappa_high};
    return m;
}

CaseData make_case1(double eps, const FineGrid& grid, const GeometryOptions& opts)
{
    CaseData d;
    d.medium = make_layered(grid, eps, low_kappa(eps), high_kappa(eps), opts);
    d.source = case_source(d.medium);
    return d;
}

CaseData make_case2(double eps, const FineGrid& grid, const GeometryOptions& opts)
{
    const double fraction = opts.fraction < 0 ? 0.25 : opts.fraction;
    if (fraction <= 0.0 || fraction >= 1.0)
        config_error("media", "inclusion volume fraction must lie in (0,1)");
    const int p = cells_per_period(eps, grid);
    const double side = std::sqrt(fraction);
    const double a = 0.5 - side / 2, b = 0.5 + side / 2;

    CaseData d;
    MediumSpec& m = d.medium;
    m.eps = eps;
    m.grid = grid;
    m.continua.num_continua = 2;
    m.continua.label.resize(grid.num_cells());
    m.kappa.resize(grid.num_cells());
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) {
            const bool inside = in_band(phase(i, p), a, b) && in_band(phase(j, p), a, b);
            const int k = grid.cell(i, j);
            m.continua.label[k] = inside ? 0 : 1;
            m.kappa[k] = inside ? low_kappa(eps) : high_kappa(eps);
        }
    m.values = {low_kappa(eps), high_kappa(eps)};
    d.source = case_source(m);
    return d;
}

MediumSpec make_homogeneous(const FineGrid& grid, double value)
{
    if (!(value > 0.0))
        config_error("media", "coefficient value must be positive");
    MediumSpec m;
    m.grid = grid;
    m.kappa.assign(grid.num_cells(), value);
    m.continua.num_continua = 1;
    m.continua.label.assign(grid.num_cells(), 0);
    m.values = {value};
    return m;
}

MediumSpec make_homogeneous_layered(const FineGrid& grid, double value, double eps)
{
    return make_layered(grid, eps, value, value);
}

SourceSpec case_source(const MediumSpec& medium)
{
    const FineGrid& g = medium.grid;
    const double kmin = *std::min_element(medium.kappa.begin(), medium.kappa.end());
    SourceSpec s;
    s.f.resize(g.num_cells());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const int k = g.cell(i, j);
            const double bump = gaussian_bump(g.xc(i), g.yc(j));
            s.f[k] = medium.continua.label[k] == 0 ? 1000.0 * kmin * bump : bump;
        }
    return s;
}

SourceSpec gaussian_source(const FineGrid& g)
{
    SourceSpec s;
    s.f.resize(g.num_cells());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            s.f[g.cell(i, j)] = gaussian_bump(g.xc(i), g.yc(j));
    return s;
}

void write_raster(std::ostream& os, const MediumSpec& m)
{
    os << "mchom-raster v1, " << m.grid.nx << ' ' << m.grid.ny << '\n';
    os << std::setprecision(17);
    for (int k = 0; k < m.grid.num_cells(); ++k)
        os << m.continua.label[k] + 1 << ' ' << m.kappa[k] << '\n';
}

MediumSpec read_raster(std::istream& is)
{
    std::string header;
    if (!std::getline(is, header))
        io_error("raster", "empty input");
    const std::string tag = "mchom-raster v1,";
    if (header.rfind(tag, 0) != 0)
        io_error("raster", "bad header '" + header + "'");
    std::istringstream hs(header.substr(tag.size()));
    int nx = 0, ny = 0;
    if (!(hs >> nx >> ny) || nx < 2 || ny < 2 || nx != ny)
        io_error("raster", "bad grid size in header '" + header + "'");

    MediumSpec m;
    m.grid = FineGrid::square(nx);
    m.kappa.resize(m.grid.num_cells());
    m.continua.label.resize(m.grid.num_cells());
    int nc = 0;
    for (int k = 0; k < m.grid.num_cells(); ++k) {
        int c = 0;
        double v = 0.0;
        if (!(is >> c >> v))
            io_error("raster", "truncated at record " + std::to_string(k));
        if (c < 1)
            io_error("raster", "continuum index must be >= 1 at record " + std::to_string(k));
        if (!(v > 0.0) || !std::isfinite(v))
            io_error("raster", "non-positive coefficient at record " + std::to_string(k));
        m.continua.label[k] = c - 1;
        m.kappa[k] = v;
        nc = std::max(nc, c);
    }
    m.continua.num_continua = nc;
    m.values = values_of(m.kappa, m.continua);
    return m;
}

void write_raster_file(const std::string& path, const MediumSpec& medium)
{
    std::ofstream os(path);
    if (!os)
        io_error("raster", "cannot open " + path + " for writing");
    write_raster(os, medium);
}

MediumSpec read_raster_file(const std::string& path)
{
    std::ifstream is(path);
    if (!is)
        io_error("raster", "cannot open " + path);
    return read_raster(is);
}

} // namespace mchom
