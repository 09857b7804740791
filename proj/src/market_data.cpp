#include "impdist/market_data.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

namespace impdist {

namespace {

constexpr std::array<std::string_view, 12> kMonthCodes = {
    "JAN", "FEB", "MAR", "APR", "MAY", "JUN", "JUL", "AUG", "SEP", "OCT", "NOV", "DEC"};

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isdigit(c) != 0;
    });
}

int to_int(std::string_view s) {
    int v = 0;
    std::from_chars(s.data(), s.data() + s.size(), v);
    return v;
}

}  // namespace

std::chrono::year_month_day parse_maturity_code(std::string_view code) {
    if (code.size() != 7 || !all_digits(code.substr(0, 2)) || !all_digits(code.substr(5, 2)))
        throw MalformedInstrument(std::string(code));
    const auto mon = std::find(kMonthCodes.begin(), kMonthCodes.end(), code.substr(2, 3));
    if (mon == kMonthCodes.end()) throw MalformedInstrument(std::string(code));
    const std::chrono::year_month_day d{
        std::chrono::year(2000 + to_int(code.substr(5, 2))),
        std::chrono::month(static_cast<unsigned>(mon - kMonthCodes.begin()) + 1),
        std::chrono::day(static_cast<unsigned>(to_int(code.substr(0, 2))))};
    if (!d.ok()) throw MalformedInstrument(std::string(code));
    return d;
}

std::string format_maturity_code(std::chrono::year_month_day d) {
    const unsigned day = static_cast<unsigned>(d.day());
    const unsigned month = static_cast<unsigned>(d.month());
    const int year = static_cast<int>(d.year());
    std::string out;
    out += static_cast<char>('0' + day / 10);
    out += static_cast<char>('0' + day % 10);
    out += kMonthCodes[month - 1];
    out += static_cast<char>('0' + (year % 100) / 10);
    out += static_cast<char>('0' + year % 10);
    return out;
}

std::int64_t settlement_timestamp(std::chrono::year_month_day maturity) {
    const auto days = std::chrono::sys_days(maturity);
    return std::chrono::duration_cast<std::chrono::seconds>(days.time_since_epoch()).count() +
           kSettlementHourUtc * 3600;
}

InstrumentSpec parse_instrument(std::string_view name) {
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (pos <= name.size()) {
        const std::size_t dash = name.find('-', pos);
        if (dash == std::string_view::npos) {
            parts.push_back(name.substr(pos));
            break;
        }
        parts.push_back(name.substr(pos, dash - pos));
        pos = dash + 1;
    }
    if (parts.size() != 2 && parts.size() != 4) throw MalformedInstrument(std::string(name));

    const std::string_view sym = parts[0];
    const bool sym_ok = !sym.empty() && std::isupper(static_cast<unsigned char>(sym[0])) &&
                        std::all_of(sym.begin(), sym.end(), [](unsigned char c) {
                            return std::isupper(c) || std::isdigit(c);
                        });
    if (!sym_ok) throw MalformedInstrument(std::string(name));

    InstrumentSpec spec;
    spec.underlying = std::string(sym);
    spec.maturity = parse_maturity_code(parts[1]);

    if (parts.size() == 2) {
        spec.kind = InstrumentKind::Future;
        return spec;
    }
    if (!all_digits(parts[2])) throw MalformedInstrument(std::string(name));
    const long long strike = std::stoll(std::string(parts[2]));
    if (strike <= 0) throw MalformedInstrument(std::string(name));
    spec.strike = static_cast<double>(strike);
    if (parts[3] == "C")
        spec.kind = InstrumentKind::Call;
    else if (parts[3] == "P")
        spec.kind = InstrumentKind::Put;
    else
        throw MalformedInstrument(std::string(name));
    return spec;
}

std::string format_instrument(const InstrumentSpec& spec) {
    std::string out = spec.underlying + "-" + format_maturity_code(spec.maturity);
    if (spec.kind == InstrumentKind::Future) return out;
    out += "-" + std::to_string(static_cast<long long>(std::llround(*spec.strike)));
    out += spec.kind == InstrumentKind::Call ? "-C" : "-P";
    return out;
}

std::vector<QuoteRecord> load_snapshot(std::istream& source) {
    std::vector<QuoteRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(source, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (j.is_discarded() || !j.is_object()) throw MalformedLine(line_no, "not a JSON object");

        QuoteRecord rec;
        try {
            rec.instrument = parse_instrument(j.at("instrument").get<std::string>());
            rec.timestamp = j.at("ts").get<std::int64_t>();
            for (const char* key : {"bid", "ask"}) {
                if (!j.contains(key) || j[key].is_null()) continue;
                const double px = j[key].get<double>();
                if (!(px >= 0.0) || !std::isfinite(px))
                    throw MalformedLine(line_no, std::string(key) + " < 0");
                (key[0] == 'b' ? rec.bid : rec.ask) = px;
            }
        } catch (const MalformedLine&) {
            throw;
        } catch (const std::exception& e) {
            throw MalformedLine(line_no, e.what());
        }
        records.push_back(std::move(rec));
    }
    if (records.empty()) throw EmptySnapshot();
    return records;
}

std::vector<QuoteRecord> load_snapshot_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open snapshot file: " + path.string());
    return load_snapshot(in);
}

OptionChain filter_chain(const std::vector<QuoteRecord>& records,
                         std::chrono::year_month_day maturity) {
    OptionChain chain;
    chain.maturity = maturity;
    for (const QuoteRecord& rec : records) {
        if (!rec.instrument.is_option() || rec.instrument.maturity != maturity) continue;
        if (!rec.bid || !rec.ask) continue;
        if (!(*rec.bid > 0.0) || *rec.bid > *rec.ask) continue;  // drops crossed books
        chain.quotes.push_back(rec);
        chain.snapshot_time = std::max(chain.snapshot_time, rec.timestamp);
    }
    if (chain.quotes.empty()) throw NoQuotesForMaturity(format_maturity_code(maturity));
    chain.time_to_maturity_minutes =
        static_cast<double>(settlement_timestamp(maturity) - chain.snapshot_time) / 60.0;
    if (!(chain.time_to_maturity_minutes > 0.0))
        throw Error("snapshot at or past settlement of " + format_maturity_code(maturity));
    return chain;
}

std::vector<std::chrono::year_month_day> option_maturities(
    const std::vector<QuoteRecord>& records) {
    std::set<std::chrono::sys_days> seen;
    for (const QuoteRecord& rec : records)
        if (rec.instrument.is_option()) seen.insert(std::chrono::sys_days(rec.instrument.maturity));
    return {seen.begin(), seen.end()};
}

double index_average(const std::vector<IndexQuote>& quotes) {
    std::vector<double> online;
    for (const IndexQuote& q : quotes)
        if (q.online) online.push_back(q.price);
    if (online.empty()) throw NoExchangeOnline();

    std::sort(online.begin(), online.end());
    std::size_t first = 0, last = online.size();
    if (online.size() >= 4) {
        ++first;  // drop exactly one instance of the min and of the max
        --last;
    }
    const double sum = std::accumulate(online.begin() + first, online.begin() + last, 0.0);
    return sum / static_cast<double>(last - first);
}

}  // namespace impdist
