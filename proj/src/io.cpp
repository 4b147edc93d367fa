#include "upk/io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "upk/errors.hpp"

namespace upk {

namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- config

struct Entry {
    std::string value;
    std::size_t line = 0;
    std::size_t column = 0;  // of the value
    bool quoted = false;
};

struct Section {
    std::size_t line = 0;
    std::map<std::string, Entry> entries;
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

std::string_view trim(std::string_view s, std::size_t* lead = nullptr) {
    std::size_t b = 0;
    while (b < s.size() && is_space(s[b])) ++b;
    std::size_t e = s.size();
    while (e > b && is_space(s[e - 1])) --e;
    if (lead) *lead = b;
    return s.substr(b, e - b);
}

std::map<std::string, Section> tokenize(std::string_view text) {
    std::map<std::string, Section> sections;
    Section* current = nullptr;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view raw = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;

        // Strip a comment that is not inside quotes.
        bool in_quotes = false;
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] == '"') in_quotes = !in_quotes;
            if (raw[i] == '#' && !in_quotes) {
                raw = raw.substr(0, i);
                break;
            }
        }
        std::size_t lead = 0;
        const std::string_view line = trim(raw, &lead);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(line_no, lead + line.size(), "expected ']' to close the section header");
            const std::string name(trim(line.substr(1, line.size() - 2)));
            if (name.empty()) throw ParseError(line_no, lead + 2, "empty section name");
            if (sections.count(name)) throw ParseError(line_no, lead + 1, "duplicate section [" + name + "]");
            current = &sections[name];
            current->line = line_no;
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(line_no, lead + 1, "expected 'key = value'");
        if (!current) throw ParseError(line_no, lead + 1, "key outside of any section");
        const std::string key(trim(line.substr(0, eq)));
        if (key.empty()) throw ParseError(line_no, lead + 1, "missing key before '='");
        std::size_t vlead = 0;
        std::string_view value = trim(line.substr(eq + 1), &vlead);
        Entry entry;
        entry.line = line_no;
        entry.column = lead + eq + 1 + vlead + 1;
        if (!value.empty() && value.front() == '"') {
            if (value.size() < 2 || value.back() != '"')
                throw ParseError(line_no, entry.column + value.size(), "unterminated quoted string");
            value = value.substr(1, value.size() - 2);
            if (value.find('"') != std::string_view::npos)
                throw ParseError(line_no, entry.column, "stray '\"' inside quoted string");
            entry.quoted = true;
            ++entry.column;
        }
        if (value.empty()) throw ParseError(line_no, entry.column, "empty value for key '" + key + "'");
        entry.value = std::string(value);
        if (current->entries.count(key)) throw ParseError(line_no, lead + 1, "duplicate key '" + key + "'");
        current->entries.emplace(key, std::move(entry));
    }
    return sections;
}

class Reader {
public:
    explicit Reader(std::map<std::string, Section> sections) : sections_(std::move(sections)) {}

    bool has_section(const std::string& name) const { return sections_.count(name) != 0; }

    void require_section(const std::string& name) const {
        if (!has_section(name)) throw ParseError(last_line(), 1, "missing section [" + name + "]");
    }

    /// Rejects keys and sections that are not in the allowed lists.
    void check_known(const std::map<std::string, std::set<std::string>>& allowed) const {
        for (const auto& [name, sec] : sections_) {
            const auto it = allowed.find(name);
            if (it == allowed.end()) throw ParseError(sec.line, 1, "unknown section [" + name + "]");
            for (const auto& [key, e] : sec.entries)
                if (!it->second.count(key))
                    throw ParseError(e.line, 1, "unknown key '" + key + "' in section [" + name + "]");
        }
    }

    const Entry* find(const std::string& section, const std::string& key) const {
        const auto s = sections_.find(section);
        if (s == sections_.end()) return nullptr;
        const auto e = s->second.entries.find(key);
        return e == s->second.entries.end() ? nullptr : &e->second;
    }

    const Entry& need(const std::string& section, const std::string& key) const {
        if (const Entry* e = find(section, key)) return *e;
        const auto s = sections_.find(section);
        throw ParseError(s == sections_.end() ? last_line() : s->second.line, 1,
                         "missing key '" + key + "' in section [" + section + "]");
    }

    static double real(const Entry& e, const std::string& key) {
        double v = 0.0;
        const char* first = e.value.data();
        const char* last = first + e.value.size();
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last || !std::isfinite(v))
            throw ParseError(e.line, e.column, "key '" + key + "': expected a real number, found '" + e.value + "'");
        return v;
    }

    static long integer(const Entry& e, const std::string& key) {
        long v = 0;
        const char* first = e.value.data();
        const char* last = first + e.value.size();
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last)
            throw ParseError(e.line, e.column, "key '" + key + "': expected an integer, found '" + e.value + "'");
        return v;
    }

    static Expr expression(const Entry& e, const std::string& key) {
        try {
            return Expr::parse(e.value);
        } catch (const SyntaxError& err) {
            throw ParseError(e.line, e.column + err.offset(), "key '" + key + "': " + err.what());
        }
    }

    double real(const std::string& section, const std::string& key) const { return real(need(section, key), key); }
    long integer(const std::string& section, const std::string& key) const { return integer(need(section, key), key); }
    Expr expression(const std::string& section, const std::string& key) const {
        return expression(need(section, key), key);
    }

private:
    std::size_t last_line() const {
        std::size_t n = 1;
        for (const auto& [name, sec] : sections_) {
            n = std::max(n, sec.line);
            for (const auto& [k, e] : sec.entries) n = std::max(n, e.line);
        }
        return n;
    }

    std::map<std::string, Section> sections_;
};

long positive(const Reader& r, const std::string& section, const std::string& key) {
    const long v = r.integer(section, key);
    if (v <= 0) {
        const Entry& e = r.need(section, key);
        throw ParseError(e.line, e.column, "key '" + key + "' must be a positive integer");
    }
    return v;
}

// ---------------------------------------------------------------- binary

template <class T>
void put_le(std::string& out, T v) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    const U bits = std::bit_cast<U>(v);
    for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(char((bits >> (8 * i)) & 0xffu));
}

template <class T>
T get_le(std::string_view in, std::size_t offset) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) bits |= U(static_cast<unsigned char>(in[offset + i])) << (8 * i);
    return std::bit_cast<T>(bits);
}

constexpr std::size_t kHeaderBytes = 4 + 4 * 4 + 8;

std::string read_all(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed: " + path.string());
    return ss.str();
}

void write_all(const fs::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

std::string exact(double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

double parse_exact(const std::string& s, const std::string& what) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw FormatError("bad number for " + what + ": '" + s + "'");
    return v;
}

std::string snapshot_name(int step) {
    std::array<char, 32> buf{};
    std::snprintf(buf.data(), buf.size(), "snap_%07d.upkf", step);
    return buf.data();
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

Config parse_config(std::string_view text) {
    Reader r(tokenize(text));
    for (const char* name : {"domain", "flux", "data", "grid"}) r.require_section(name);

    Config cfg;
    ProblemSpec& p = cfg.spec;
    const long d = r.integer("domain", "d");
    if (d != 1 && d != 2) {
        const Entry& e = r.need("domain", "d");
        throw ParseError(e.line, e.column, "key 'd' must be 1 or 2");
    }
    p.dim = int(d);

    std::set<std::string> flux_keys{"a"};
    for (int i = 1; i <= p.dim; ++i) flux_keys.insert("phi_" + std::to_string(i));
    r.check_known({
        {"domain", {"d", "L", "T", "S"}},
        {"flux", flux_keys},
        {"source", {"beta", "tau", "gamma", "b1"}},
        {"data", {"u0_1", "u0_2", "uS_2"}},
        {"grid", {"Nx", "Ns", "snapshot_stride"}},
        {"scheme", {"flux_kind", "epsilon", "cfl_safety"}},
        {"output", {"dir", "report"}},
    });

    p.length = r.real("domain", "L");
    p.horizon_t = r.real("domain", "T");
    p.horizon_s = r.real("domain", "S");
    p.s_flux = r.expression("flux", "a");
    for (int i = 1; i <= p.dim; ++i) p.x_flux.push_back(r.expression("flux", "phi_" + std::to_string(i)));
    p.initial_data = r.expression("data", "u0_1");
    p.s0_data = r.expression("data", "u0_2");
    p.sS_data = r.expression("data", "uS_2");

    if (r.has_section("source")) {
        p.impulse = r.expression("source", "beta");
        p.impulse_time = r.real("source", "tau");
        p.impulse_support = r.real("source", "b1");
        if (r.find("source", "gamma")) p.delay_width = r.real("source", "gamma");
    }

    cfg.grid.dim = p.dim;
    cfg.grid.nx = int(positive(r, "grid", "Nx"));
    cfg.grid.ns = int(positive(r, "grid", "Ns"));
    cfg.grid.length = p.length;
    cfg.grid.horizon_s = p.horizon_s;
    cfg.grid.horizon_t = p.horizon_t;
    if (r.find("grid", "snapshot_stride")) cfg.run.stride = int(positive(r, "grid", "snapshot_stride"));

    if (const Entry* e = r.find("scheme", "flux_kind")) {
        if (e->value == "eo")
            cfg.run.flux = FluxKind::EngquistOsher;
        else if (e->value == "lf")
            cfg.run.flux = FluxKind::LaxFriedrichs;
        else
            throw ParseError(e->line, e->column, "key 'flux_kind' must be 'eo' or 'lf', found '" + e->value + "'");
    }
    if (r.find("scheme", "epsilon")) cfg.epsilon = r.real("scheme", "epsilon");
    if (r.find("scheme", "cfl_safety")) {
        cfg.run.cfl_safety = r.real("scheme", "cfl_safety");
        if (!(cfg.run.cfl_safety > 0.0 && cfg.run.cfl_safety <= 1.0)) {
            const Entry& e = r.need("scheme", "cfl_safety");
            throw ParseError(e.line, e.column, "key 'cfl_safety' must lie in (0, 1]");
        }
    }
    if (const Entry* e = r.find("output", "dir")) cfg.output_dir = e->value;
    if (const Entry* e = r.find("output", "report")) cfg.report_path = e->value;

    p.viscosity = cfg.epsilon;
    validate(p);
    return cfg;
}

Config load_config(const fs::path& path) { return parse_config(read_all(path)); }

std::string encode_field(const Field& f) {
    const Grid& g = f.grid;
    if (f.values.size() != g.cells()) throw FormatError("field size does not match its grid");
    std::string out = "UPKF";
    out.reserve(kHeaderBytes + 8 * f.values.size());
    put_le(out, kFieldFormatVersion);
    put_le(out, std::uint32_t(g.dim));
    put_le(out, std::uint32_t(g.nx));
    put_le(out, std::uint32_t(g.ns));
    put_le(out, f.t);
    for (double v : f.values) put_le(out, v);
    return out;
}

Field decode_field(std::string_view bytes) {
    if (bytes.size() < kHeaderBytes) throw FormatError("truncated header: " + std::to_string(bytes.size()) + " bytes");
    if (bytes.substr(0, 4) != "UPKF") throw FormatError("bad magic, expected UPKF");
    const auto version = get_le<std::uint32_t>(bytes, 4);
    if (version != kFieldFormatVersion) throw FormatError("unsupported format version " + std::to_string(version));
    const auto d = get_le<std::uint32_t>(bytes, 8);
    const auto nx = get_le<std::uint32_t>(bytes, 12);
    const auto ns = get_le<std::uint32_t>(bytes, 16);
    if ((d != 1 && d != 2) || nx == 0 || ns == 0) throw FormatError("bad header dimensions");
    Grid g;
    g.dim = int(d);
    g.nx = int(nx);
    g.ns = int(ns);
    const std::size_t n = g.cells();
    if (bytes.size() != kHeaderBytes + 8 * n)
        throw FormatError("payload is " + std::to_string(bytes.size() - kHeaderBytes) + " bytes, header implies " +
                          std::to_string(8 * n));
    Field f(g, get_le<double>(bytes, 20));
    for (std::size_t i = 0; i < n; ++i) f.values[i] = get_le<double>(bytes, kHeaderBytes + 8 * i);
    return f;
}

void write_field(const fs::path& path, const Field& f) { write_all(path, encode_field(f)); }

Field read_field(const fs::path& path) { return decode_field(read_all(path)); }

void write_trajectory(const fs::path& dir, const Trajectory& traj) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    const Grid& g = traj.grid;
    std::ostringstream meta;
    meta << "mode=" << to_string(traj.mode) << "\n"
         << "flux=" << to_string(traj.flux) << "\n"
         << "dim=" << g.dim << "\nnx=" << g.nx << "\nns=" << g.ns << "\n"
         << "length=" << exact(g.length) << "\nhorizon_s=" << exact(g.horizon_s) << "\n"
         << "horizon_t=" << exact(g.horizon_t) << "\ndt=" << exact(g.dt) << "\nnt=" << g.nt << "\n"
         << "gamma=" << exact(traj.gamma) << "\nepsilon=" << exact(traj.epsilon) << "\n"
         << "bound=" << exact(traj.bound) << "\ncfl_safety=" << exact(traj.cfl_safety) << "\n"
         << "tau_snapped=" << exact(traj.tau_snapped) << "\ntau_step=" << traj.tau_step << "\n"
         << "stride=" << traj.stride << "\n";
    write_all(dir / "meta.txt", meta.str());

    std::ostringstream index;
    index << "step,t,file,grad_x_sq,grad_s_sq\n";
    for (const Snapshot& s : traj.snapshots) {
        const std::string name = snapshot_name(s.step);
        write_field(dir / name, s.field);
        index << s.step << "," << exact(s.field.t) << "," << name << "," << exact(s.grad_x_sq) << ","
              << exact(s.grad_s_sq) << "\n";
    }
    write_all(dir / "index.csv", index.str());
    if (traj.tau_minus) write_field(dir / "tau_minus.upkf", *traj.tau_minus);
    if (traj.tau_plus) write_field(dir / "tau_plus.upkf", *traj.tau_plus);
}

Trajectory read_trajectory(const fs::path& dir) {
    std::map<std::string, std::string> meta;
    {
        std::istringstream in(read_all(dir / "meta.txt"));
        std::string line;
        while (std::getline(in, line)) {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            meta[line.substr(0, eq)] = line.substr(eq + 1);
        }
    }
    const auto get = [&](const std::string& key) -> const std::string& {
        const auto it = meta.find(key);
        if (it == meta.end()) throw FormatError("meta.txt: missing '" + key + "'");
        return it->second;
    };
    const auto real = [&](const std::string& key) { return parse_exact(get(key), key); };
    const auto integer = [&](const std::string& key) { return int(std::lround(parse_exact(get(key), key))); };

    Trajectory traj;
    const std::string mode = get("mode");
    if (mode == "regularized")
        traj.mode = SolveMode::Regularized;
    else if (mode == "entropy")
        traj.mode = SolveMode::Entropy;
    else if (mode == "impulsive")
        traj.mode = SolveMode::Impulsive;
    else
        throw FormatError("meta.txt: unknown mode '" + mode + "'");
    traj.flux = get("flux") == "lf" ? FluxKind::LaxFriedrichs : FluxKind::EngquistOsher;
    Grid& g = traj.grid;
    g.dim = integer("dim");
    g.nx = integer("nx");
    g.ns = integer("ns");
    g.length = real("length");
    g.horizon_s = real("horizon_s");
    g.horizon_t = real("horizon_t");
    g.dt = real("dt");
    g.nt = integer("nt");
    traj.gamma = real("gamma");
    traj.epsilon = real("epsilon");
    traj.bound = real("bound");
    traj.cfl_safety = real("cfl_safety");
    traj.tau_snapped = real("tau_snapped");
    traj.tau_step = integer("tau_step");
    traj.stride = integer("stride");

    const auto load = [&](const fs::path& path) {
        Field f = read_field(path);
        if (f.grid.dim != g.dim || f.grid.nx != g.nx || f.grid.ns != g.ns)
            throw FormatError(path.string() + ": mesh differs from meta.txt");
        const double t = f.t;
        f.grid = g;
        f.t = t;
        return f;
    };

    std::istringstream index(read_all(dir / "index.csv"));
    std::string line;
    std::getline(index, line);
    while (std::getline(index, line)) {
        if (line.empty() || line == "\r") continue;
        const auto cols = split(line, ',');
        if (cols.size() != 5) throw FormatError("index.csv: expected 5 columns in '" + line + "'");
        Snapshot s;
        s.step = int(std::lround(parse_exact(cols[0], "step")));
        s.field = load(dir / cols[2]);
        s.grad_x_sq = parse_exact(cols[3], "grad_x_sq");
        s.grad_s_sq = parse_exact(cols[4], "grad_s_sq");
        traj.snapshots.push_back(std::move(s));
    }
    if (traj.snapshots.empty()) throw FormatError("index.csv lists no snapshots");
    if (fs::exists(dir / "tau_minus.upkf")) traj.tau_minus = load(dir / "tau_minus.upkf");
    if (fs::exists(dir / "tau_plus.upkf")) traj.tau_plus = load(dir / "tau_plus.upkf");
    return traj;
}

std::string format_report_csv(const std::vector<VerificationReport>& reports) {
    std::ostringstream out;
    out << "check,measured,bound,tolerance,pass,context-hash\n";
    for (const auto& r : reports) {
        std::array<char, 17> hash{};
        std::snprintf(hash.data(), hash.size(), "%016llx", static_cast<unsigned long long>(r.context_hash));
        out << r.name << "," << exact(r.measured) << "," << exact(r.bound) << "," << exact(r.tolerance) << ","
            << (r.pass ? "true" : "false") << "," << hash.data() << "\n";
    }
    return out.str();
}

void write_report_csv(const fs::path& path, const std::vector<VerificationReport>& reports) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    write_all(path, format_report_csv(reports));
}

}  // namespace upk
