#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "impdist/errors.hpp"

namespace impdist {

enum class InstrumentKind { Call, Put, Future };

/// Parsed instrument name: SYM-DDMMMYY for futures, SYM-DDMMMYY-STRIKE-{C|P}
/// for options. Strike is USD per coin.
struct InstrumentSpec {
    std::string underlying;
    std::chrono::year_month_day maturity;
    std::optional<double> strike;  // absent for futures
    InstrumentKind kind = InstrumentKind::Future;

    bool is_option() const { return kind != InstrumentKind::Future; }
};

/// One instrument's best bid/ask at a timestamp. Prices are in coin; either
/// side may be absent.
struct QuoteRecord {
    InstrumentSpec instrument;
    std::optional<double> bid;
    std::optional<double> ask;
    std::int64_t timestamp = 0;  // UNIX seconds, UTC
};

/// Filtered option quotes of a single maturity at one snapshot time.
struct OptionChain {
    std::chrono::year_month_day maturity;
    std::int64_t snapshot_time = 0;
    std::vector<QuoteRecord> quotes;
    double time_to_maturity_minutes = 0.0;
};

/// Contracts settle at 08:00 UTC on the maturity date.
inline constexpr int kSettlementHourUtc = 8;

std::int64_t settlement_timestamp(std::chrono::year_month_day maturity);

/// "29MAR19" <-> calendar date.
std::chrono::year_month_day parse_maturity_code(std::string_view code);
std::string format_maturity_code(std::chrono::year_month_day d);

/// Parse an instrument name; throws MalformedInstrument on grammar violation.
InstrumentSpec parse_instrument(std::string_view name);

/// Inverse of parse_instrument on valid specs.
std::string format_instrument(const InstrumentSpec& spec);

/// Read a line-delimited snapshot: one JSON record per line with keys
/// "instrument", optional "bid"/"ask", and "ts". Blank lines are skipped;
/// anything else malformed throws MalformedLine. Throws EmptySnapshot when no
/// record survives.
std::vector<QuoteRecord> load_snapshot(std::istream& source);
std::vector<QuoteRecord> load_snapshot_file(const std::filesystem::path& path);

/// Keep only option quotes of the given maturity that carry both sides with
/// bid > 0 and bid <= ask. Throws NoQuotesForMaturity when nothing survives.
OptionChain filter_chain(const std::vector<QuoteRecord>& records,
                         std::chrono::year_month_day maturity);

/// Option maturities present in a record set, ascending.
std::vector<std::chrono::year_month_day> option_maturities(
    const std::vector<QuoteRecord>& records);

struct IndexQuote {
    std::string exchange;
    double price = 0.0;
    bool online = false;
};

/// Exchange index average: with n online quotes, n>=4 drops one highest and
/// one lowest and averages the rest; n in {2,3} averages all; n==1 is the
/// index. Throws NoExchangeOnline when nothing is online.
double index_average(const std::vector<IndexQuote>& quotes);

}  // namespace impdist
