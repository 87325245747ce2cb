#include "optcd/limit_table_io.hpp"

#include "optcd/error.hpp"
#include "optcd/format.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace optcd {
namespace {

void write_meta(std::ostream& out, const char* kind, const ValueGrid::Meta& m) {
    out << "optcd-limit-table\n";
    out << "format_version " << kLimitTableFormatVersion << "\n";
    out << "kind " << kind << "\n";
    out << "c " << format_double(m.c) << "\n";
    out << "horizon " << m.horizon << "\n";
    out << "model " << m.model << "\n";
    out << "x0 " << format_double(m.x0) << "\n";
    out << "pair " << m.pair << "\n";
    out << "quad_nodes " << m.quad_nodes << "\n";
}

double parse_num(const std::string& text, int line) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    auto [p, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || p != end)
        throw ConfigError("limit table line " + std::to_string(line) + ": bad number '" + text + "'");
    return v;
}

int parse_int(const std::string& text, int line) {
    int v = 0;
    const char* end = text.data() + text.size();
    auto [p, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc{} || p != end)
        throw ConfigError("limit table line " + std::to_string(line) + ": bad integer '" + text + "'");
    return v;
}

}  // namespace

void write_limit_table(std::ostream& out, const ValueGrid& grid) {
    write_meta(out, "value_grid", grid.meta());
    const auto& a = grid.axes();
    out << "y_axis " << format_double(a.y_min) << " " << format_double(a.y_max) << " " << a.y_count << "\n";
    out << "x_axis " << format_double(a.x_lo) << " " << format_double(a.x_hi) << " " << a.x_count << "\n";
    out << "columns n y x value\n";
    const std::size_t nx = std::max<std::size_t>(a.x.size(), 1);
    for (int n = 0; n <= grid.horizon() + 1; ++n)
        for (std::size_t ix = 0; ix < nx; ++ix)
            for (std::size_t iy = 0; iy < a.y.size(); ++iy)
                out << n << " " << format_double(a.y[iy]) << " " << format_double(a.x.empty() ? 0.0 : a.x[ix]) << " "
                    << format_double(grid.node(n, ix, iy)) << "\n";
}

void write_limit_table(std::ostream& out, const EquivalentLimitTable& table) {
    write_meta(out, "equivalent", table.meta());
    out << "x_knots " << table.x_knots().size() << "\n";
    out << "max_residual " << format_double(table.max_residual()) << "\n";
    out << "columns n x value\n";
    const std::size_t nx = std::max<std::size_t>(table.x_knots().size(), 1);
    for (int n = 1; n <= table.horizon(); ++n)
        for (std::size_t ix = 0; ix < nx; ++ix)
            out << n << " " << format_double(table.x_knots().empty() ? 0.0 : table.x_knots()[ix]) << " "
                << format_double(table.node(n, ix)) << "\n";
}

LimitTable read_limit_table(std::istream& in) {
    std::string line;
    int lineno = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!line.empty()) return true;
        }
        return false;
    };
    if (!next_line() || line != "optcd-limit-table") throw ConfigError("limit table: missing magic line");

    std::map<std::string, std::string> head;
    while (next_line()) {
        const auto sp = line.find(' ');
        const std::string key = line.substr(0, sp);
        const std::string val = sp == std::string::npos ? "" : line.substr(sp + 1);
        if (head.count(key)) throw ConfigError("limit table line " + std::to_string(lineno) + ": duplicate " + key);
        head[key] = val;
        if (key == "columns") break;
    }
    auto get = [&](const std::string& key) -> const std::string& {
        auto it = head.find(key);
        if (it == head.end()) throw ConfigError("limit table: header key '" + key + "' missing");
        return it->second;
    };
    if (parse_int(get("format_version"), lineno) != kLimitTableFormatVersion)
        throw ConfigError("limit table: unsupported format_version " + get("format_version"));

    ValueGrid::Meta meta;
    meta.c = parse_num(get("c"), lineno);
    meta.horizon = parse_int(get("horizon"), lineno);
    meta.model = get("model");
    meta.x0 = parse_num(get("x0"), lineno);
    meta.pair = get("pair");
    meta.quad_nodes = parse_int(get("quad_nodes"), lineno);
    if (meta.horizon < 2) throw ConfigError("limit table: horizon must be >= 2");

    auto fields = [&](std::size_t expect) {
        std::vector<std::string> f;
        std::istringstream ss(line);
        std::string tok;
        while (ss >> tok) f.push_back(tok);
        if (f.size() != expect)
            throw ConfigError("limit table line " + std::to_string(lineno) + ": expected " + std::to_string(expect) +
                              " fields");
        return f;
    };

    const std::string& kind = get("kind");
    if (kind == "value_grid") {
        std::istringstream ya(get("y_axis")), xa(get("x_axis"));
        std::string y0, y1, yc, x0s, x1s, xc;
        ya >> y0 >> y1 >> yc;
        xa >> x0s >> x1s >> xc;
        GridAxes axes = GridAxes::make(parse_num(y0, lineno), parse_num(y1, lineno), parse_int(yc, lineno),
                                       parse_num(x0s, lineno), parse_num(x1s, lineno), parse_int(xc, lineno));
        const std::size_t nx = std::max<std::size_t>(axes.x.size(), 1);
        std::vector<double> values;
        values.reserve(static_cast<std::size_t>(meta.horizon + 2) * nx * axes.y.size());
        for (int n = 0; n <= meta.horizon + 1; ++n)
            for (std::size_t ix = 0; ix < nx; ++ix)
                for (std::size_t iy = 0; iy < axes.y.size(); ++iy) {
                    if (!next_line()) throw ConfigError("limit table: truncated records");
                    const auto f = fields(4);
                    const double xv = axes.x.empty() ? 0.0 : axes.x[ix];
                    if (parse_int(f[0], lineno) != n || parse_num(f[1], lineno) != axes.y[iy] ||
                        parse_num(f[2], lineno) != xv)
                        throw ConfigError("limit table line " + std::to_string(lineno) +
                                          ": record coordinates do not match the header axes");
                    values.push_back(parse_num(f[3], lineno));
                }
        if (next_line()) throw ConfigError("limit table line " + std::to_string(lineno) + ": trailing records");
        return ValueGrid(std::move(meta), std::move(axes), std::move(values));
    }
    if (kind == "equivalent") {
        const int nxk = parse_int(get("x_knots"), lineno);
        const double max_res = parse_num(get("max_residual"), lineno);
        const std::size_t nx = std::max(nxk, 1);
        std::vector<double> xk, values;
        for (int n = 1; n <= meta.horizon; ++n)
            for (std::size_t ix = 0; ix < nx; ++ix) {
                if (!next_line()) throw ConfigError("limit table: truncated records");
                const auto f = fields(3);
                if (parse_int(f[0], lineno) != n)
                    throw ConfigError("limit table line " + std::to_string(lineno) + ": unexpected time index");
                const double xv = parse_num(f[1], lineno);
                if (nxk > 0) {
                    if (n == 1)
                        xk.push_back(xv);
                    else if (xk[ix] != xv)
                        throw ConfigError("limit table line " + std::to_string(lineno) + ": inconsistent x knot");
                }
                values.push_back(parse_num(f[2], lineno));
            }
        if (next_line()) throw ConfigError("limit table line " + std::to_string(lineno) + ": trailing records");
        return EquivalentLimitTable(std::move(meta), std::move(xk), std::move(values), max_res);
    }
    throw ConfigError("limit table: unknown kind '" + kind + "'");
}

void save_limit_table(const std::filesystem::path& path, const LimitTable& table) {
    std::ofstream out(path);
    if (!out) throw MissingArtifact("cannot open '" + path.string() + "' for writing");
    std::visit([&](const auto& t) { write_limit_table(out, t); }, table);
    if (!out) throw MissingArtifact("failed writing '" + path.string() + "'");
}

LimitTable load_limit_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifact("limit table '" + path.string() + "' not found");
    return read_limit_table(in);
}

}  // namespace optcd
