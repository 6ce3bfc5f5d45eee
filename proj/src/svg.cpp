#include "sitsq/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <vector>

namespace sitsq {

namespace {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw plot_error("missing column '" + name + "'");
    }
    std::vector<double> numbers(const std::string& name) const {
        const std::size_t c = column(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) {
            char* end = nullptr;
            const double v = std::strtod(r[c].c_str(), &end);
            if (end == r[c].c_str())
                throw plot_error("non-numeric value '" + r[c] + "' in column '" +
                                 name + "'");
            out.push_back(v);
        }
        return out;
    }
};

Table parse_csv(const std::string& content) {
    Table t;
    std::istringstream in(content);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (first) {
            t.header = cells;
            first = false;
        } else {
            if (cells.size() != t.header.size())
                throw plot_error("row has " + std::to_string(cells.size()) +
                                 " cells, header has " +
                                 std::to_string(t.header.size()));
            t.rows.push_back(cells);
        }
    }
    if (t.header.empty()) throw plot_error("empty CSV");
    if (t.rows.empty()) throw plot_error("CSV has no data rows");
    return t;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// plot frame geometry
constexpr double W = 800, H = 500, ML = 80, MR = 30, MT = 40, MB = 60;

struct Axis {
    double lo = 0.0, hi = 1.0;
    double map(double v, bool vertical) const {
        const double f = (v - lo) / (hi - lo);
        return vertical ? (H - MB) - f * (H - MT - MB) : ML + f * (W - ML - MR);
    }
};

Axis fit_axis(std::vector<double> vals) {
    Axis a;
    a.lo = *std::min_element(vals.begin(), vals.end());
    a.hi = *std::max_element(vals.begin(), vals.end());
    if (a.hi == a.lo) {
        a.lo -= 1.0;
        a.hi += 1.0;
    } else {
        const double pad = 0.06 * (a.hi - a.lo);
        a.lo -= pad;
        a.hi += pad;
    }
    return a;
}

void draw_frame(std::ostringstream& o, const Axis& xa, const Axis& ya,
                const std::string& xlabel, const std::string& ylabel,
                const std::string& title) {
    o << "<rect x='" << ML << "' y='" << MT << "' width='" << W - ML - MR
      << "' height='" << H - MT - MB
      << "' fill='none' stroke='black' stroke-width='1'/>\n";
    for (int i = 0; i <= 6; ++i) {
        const double fx = xa.lo + (xa.hi - xa.lo) * i / 6.0;
        const double px = xa.map(fx, false);
        o << "<line x1='" << px << "' y1='" << H - MB << "' x2='" << px << "' y2='"
          << H - MB + 6 << "' stroke='black'/>\n";
        o << "<text x='" << px << "' y='" << H - MB + 22
          << "' font-size='13' text-anchor='middle'>" << fmt(fx) << "</text>\n";
        const double fy = ya.lo + (ya.hi - ya.lo) * i / 6.0;
        const double py = ya.map(fy, true);
        o << "<line x1='" << ML - 6 << "' y1='" << py << "' x2='" << ML << "' y2='"
          << py << "' stroke='black'/>\n";
        o << "<text x='" << ML - 10 << "' y='" << py + 4
          << "' font-size='13' text-anchor='end'>" << fmt(fy) << "</text>\n";
    }
    o << "<text x='" << (ML + W - MR) / 2 << "' y='" << H - 14
      << "' font-size='15' text-anchor='middle'>" << xlabel << "</text>\n";
    o << "<text x='20' y='" << (MT + H - MB) / 2
      << "' font-size='15' text-anchor='middle' transform='rotate(-90 20 "
      << (MT + H - MB) / 2 << ")'>" << ylabel << "</text>\n";
    o << "<text x='" << (ML + W - MR) / 2 << "' y='24' font-size='16' "
         "text-anchor='middle'>" << title << "</text>\n";
}

std::string line_plot(const std::vector<double>& x, const std::vector<double>& y,
                      const std::vector<double>& ylo, const std::vector<double>& yhi,
                      const std::string& xlabel, const std::string& ylabel,
                      const std::string& title) {
    Axis xa = fit_axis(x);
    std::vector<double> yall = y;
    yall.insert(yall.end(), ylo.begin(), ylo.end());
    yall.insert(yall.end(), yhi.begin(), yhi.end());
    Axis ya = fit_axis(yall);

    std::ostringstream o;
    o << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
      << "' viewBox='0 0 " << W << " " << H << "'>\n";
    o << "<rect width='100%' height='100%' fill='white'/>\n";
    if (!ylo.empty()) {
        o << "<polygon fill='#9ecae1' fill-opacity='0.5' stroke='none' points='";
        for (std::size_t i = 0; i < x.size(); ++i)
            o << xa.map(x[i], false) << "," << ya.map(yhi[i], true) << " ";
        for (std::size_t i = x.size(); i-- > 0;)
            o << xa.map(x[i], false) << "," << ya.map(ylo[i], true) << " ";
        o << "'/>\n";
    }
    o << "<polyline fill='none' stroke='#1f5fa8' stroke-width='2' points='";
    for (std::size_t i = 0; i < x.size(); ++i)
        o << xa.map(x[i], false) << "," << ya.map(y[i], true) << " ";
    o << "'/>\n";
    for (std::size_t i = 0; i < x.size(); ++i)
        o << "<circle cx='" << xa.map(x[i], false) << "' cy='" << ya.map(y[i], true)
          << "' r='2.5' fill='#1f5fa8'/>\n";
    draw_frame(o, xa, ya, xlabel, ylabel, title);
    o << "</svg>\n";
    return o.str();
}

std::string heat_color(double f) {
    // f in [0,1]: blue -> white -> red
    f = std::clamp(f, 0.0, 1.0);
    int r, g, b;
    if (f < 0.5) {
        const double t = f / 0.5;
        r = static_cast<int>(33 + t * (255 - 33));
        g = static_cast<int>(102 + t * (255 - 102));
        b = static_cast<int>(172 + t * (255 - 172));
    } else {
        const double t = (f - 0.5) / 0.5;
        r = static_cast<int>(255 - t * (255 - 178));
        g = static_cast<int>(255 - t * (255 - 24));
        b = static_cast<int>(255 - t * (255 - 43));
    }
    char buf[10];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

// pick rows with both minimal S (dB) to locate the optimum cell
std::pair<double, double> surface_optimum(const Table& t) {
    auto z = t.numbers("z_m");
    auto th = t.numbers("theta_rad");
    auto s = t.numbers("S");
    std::size_t best = 0;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i] < s[best]) best = i;
    return {z[best], th[best]};
}

std::vector<double> db_band(const std::vector<double>& s,
                            const std::vector<double>& err, double sign) {
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double v = std::max(s[i] + sign * err[i], 1e-12);
        out[i] = 10.0 * std::log10(v);
    }
    return out;
}

std::vector<double> to_db(const std::vector<double>& s) {
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
        out[i] = 10.0 * std::log10(std::max(s[i], 1e-12));
    return out;
}

} // namespace

std::string plot_from_csv(const std::string& csv_content, const std::string& kind) {
    const Table t = parse_csv(csv_content);

    if (kind == "phase" || kind == "length") {
        auto z = t.numbers("z_m");
        auto th = t.numbers("theta_rad");
        auto s = t.numbers("S");
        auto err = t.numbers("stderr");
        const auto [z_opt, th_opt] = surface_optimum(t);
        std::vector<double> x, ss, ee;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (kind == "phase" && z[i] == z_opt) {
                x.push_back(th[i]);
                ss.push_back(s[i]);
                ee.push_back(err[i]);
            } else if (kind == "length" && th[i] == th_opt) {
                x.push_back(z[i]);
                ss.push_back(s[i]);
                ee.push_back(err[i]);
            }
        }
        if (x.empty()) throw plot_error("no rows selected for kind '" + kind + "'");
        if (kind == "phase")
            return line_plot(x, to_db(ss), db_band(ss, ee, -1.0), db_band(ss, ee, 1.0),
                             "LO phase (rad)", "S (dB)",
                             "squeezing vs LO phase at z = " + fmt(z_opt) + " m");
        return line_plot(x, to_db(ss), db_band(ss, ee, -1.0), db_band(ss, ee, 1.0),
                         "z (m)", "S (dB)",
                         "squeezing vs length at theta = " + fmt(th_opt) + " rad");
    }

    if (kind == "heatmap") {
        auto z = t.numbers("z_m");
        auto th = t.numbers("theta_rad");
        auto sdb = to_db(t.numbers("S"));
        std::vector<double> zs = z, ths = th;
        std::sort(zs.begin(), zs.end());
        zs.erase(std::unique(zs.begin(), zs.end()), zs.end());
        std::sort(ths.begin(), ths.end());
        ths.erase(std::unique(ths.begin(), ths.end()), ths.end());
        const double lo = *std::min_element(sdb.begin(), sdb.end());
        const double hi = *std::max_element(sdb.begin(), sdb.end());
        const double span = std::max(1e-12, std::max(std::fabs(lo), std::fabs(hi)));
        Axis xa{zs.front(), zs.back()};
        Axis ya{ths.front(), ths.back()};
        const double cw = (W - ML - MR) / static_cast<double>(zs.size());
        const double ch = (H - MT - MB) / static_cast<double>(ths.size());
        std::ostringstream o;
        o << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='"
          << H << "' viewBox='0 0 " << W << " " << H << "'>\n";
        o << "<rect width='100%' height='100%' fill='white'/>\n";
        std::map<double, std::size_t> zi, ti;
        for (std::size_t i = 0; i < zs.size(); ++i) zi[zs[i]] = i;
        for (std::size_t i = 0; i < ths.size(); ++i) ti[ths[i]] = i;
        for (std::size_t r = 0; r < z.size(); ++r) {
            const double px = ML + zi[z[r]] * cw;
            const double py = (H - MB) - (ti[th[r]] + 1) * ch;
            // diverging map centered at 0 dB
            const double f = 0.5 + 0.5 * sdb[r] / span;
            o << "<rect x='" << px << "' y='" << py << "' width='" << cw + 0.5
              << "' height='" << ch + 0.5 << "' fill='" << heat_color(f) << "'/>\n";
        }
        draw_frame(o, xa, ya, "z (m)", "LO phase (rad)",
                   "S (dB) over length and phase [" + fmt(lo) + ", " + fmt(hi) + "]");
        o << "</svg>\n";
        return o.str();
    }

    if (kind == "detuning") {
        auto x = t.numbers("log10_delta_plus1");
        auto s = t.numbers("S_opt");
        auto err = t.numbers("stderr");
        return line_plot(x, to_db(s), db_band(s, err, -1.0), db_band(s, err, 1.0),
                         "log10(delta tau_p + 1)", "optimum S (dB)",
                         "optimum squeezing vs detuning");
    }

    if (kind == "pressure") {
        auto x = t.numbers("pressure_Pa");
        auto s = t.numbers("S_opt");
        auto err = t.numbers("stderr");
        return line_plot(x, to_db(s), db_band(s, err, -1.0), db_band(s, err, 1.0),
                         "pressure (Pa)", "optimum S (dB)",
                         "optimum squeezing vs pressure");
    }

    throw plot_error("unknown plot kind '" + kind + "'");
}

} // namespace sitsq
