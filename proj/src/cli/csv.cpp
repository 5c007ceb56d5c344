#include <array>
#include <charconv>
#include <chrono>
#include <ctime>
#include <istream>
#include <ostream>
#include <sstream>

#include "odeflow/cli.hpp"

namespace odeflow::cli {

namespace {

constexpr const char* kLandscapeHeader = "a_star,t,sigma2,a,loss";
constexpr const char* kTrainHeader = "epoch,method,a0,loss,param,terminal_variance,grad_norm";

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) fields.push_back(field);
  if (!line.empty() && line.back() == sep) fields.emplace_back();
  return fields;
}

// Skips manifest comments, then requires the header row.
void expect_header(std::istream& is, const char* header) {
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (line != header) {
      throw UsageError("unexpected CSV header '" + line + "', wanted '" + header + "'");
    }
    return;
  }
  throw UsageError(std::string("CSV is missing its header row '") + header + "'");
}

int parse_int(const std::string& text) {
  int value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) throw UsageError("not an integer: '" + text + "'");
  return value;
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] =
      std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::general, 17);
  if (ec != std::errc()) throw std::runtime_error("to_chars failed");
  return std::string(buf.data(), ptr);
}

double parse_double(const std::string& text) {
  const std::string s = trim(text);
  // from_chars rejects a leading '+', which a hand-written config may carry.
  const std::size_t skip = !s.empty() && s.front() == '+' ? 1 : 0;
  double value = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data() + skip, end, value);
  if (s.empty() || ec != std::errc() || ptr != end) {
    throw UsageError("not a number: '" + text + "'");
  }
  return value;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> values;
  for (const std::string& item : split(text, ',')) values.push_back(parse_double(item));
  if (values.empty()) throw UsageError("empty number list");
  return values;
}

std::pair<double, double> parse_range(const std::string& text) {
  const auto colon = text.find(':', 1);
  if (colon == std::string::npos) {
    throw UsageError("range must look like MIN:MAX, got '" + text + "'");
  }
  return {parse_double(text.substr(0, colon)), parse_double(text.substr(colon + 1))};
}

std::string Manifest::render(const std::string& prefix) const {
  std::ostringstream os;
  os << prefix << "command=" << command << '\n';
  os << prefix << "tool_version=" << tool_version << '\n';
  os << prefix << "started_at=" << started_at << '\n';
  os << prefix << "seed=" << seed << '\n';
  for (const auto& [key, value] : config) os << prefix << key << '=' << value << '\n';
  return os.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::array<char, 32> buf{};
  const std::size_t len = std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string(buf.data(), len);
}

void write_landscape_csv(std::ostream& os, const Manifest& manifest,
                         const std::vector<LandscapeRow>& rows) {
  os << manifest.render("# ") << kLandscapeHeader << '\n';
  for (const LandscapeRow& r : rows) {
    os << format_double(r.a_star) << ',' << format_double(r.t) << ',' << format_double(r.sigma2)
       << ',' << format_double(r.a) << ',';
    if (r.loss) os << format_double(*r.loss);
    os << '\n';
  }
}

void write_train_csv(std::ostream& os, const Manifest& manifest,
                     const std::vector<TrainRow>& rows) {
  os << manifest.render("# ") << kTrainHeader << '\n';
  for (const TrainRow& r : rows) {
    os << r.epoch << ',' << r.method << ',' << format_double(r.a0) << ',' << format_double(r.loss)
       << ',' << format_double(r.param) << ',' << format_double(r.terminal_variance) << ','
       << format_double(r.grad_norm) << '\n';
  }
}

std::vector<LandscapeRow> read_landscape_csv(std::istream& is) {
  expect_header(is, kLandscapeHeader);
  std::vector<LandscapeRow> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 5) throw UsageError("landscape row needs 5 fields: '" + line + "'");
    LandscapeRow r;
    r.a_star = parse_double(f[0]);
    r.t = parse_double(f[1]);
    r.sigma2 = parse_double(f[2]);
    r.a = parse_double(f[3]);
    if (!f[4].empty()) r.loss = parse_double(f[4]);
    rows.push_back(r);
  }
  return rows;
}

std::vector<TrainRow> read_train_csv(std::istream& is) {
  expect_header(is, kTrainHeader);
  std::vector<TrainRow> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 7) throw UsageError("train row needs 7 fields: '" + line + "'");
    TrainRow r;
    r.epoch = parse_int(f[0]);
    r.method = f[1];
    r.a0 = parse_double(f[2]);
    r.loss = parse_double(f[3]);
    r.param = parse_double(f[4]);
    r.terminal_variance = parse_double(f[5]);
    r.grad_norm = parse_double(f[6]);
    rows.push_back(r);
  }
  return rows;
}

std::string csv_body(const std::string& text) {
  std::size_t pos = 0;
  while (pos < text.size() && text[pos] == '#') {
    const auto nl = text.find('\n', pos);
    if (nl == std::string::npos) return "";
    pos = nl + 1;
  }
  return text.substr(pos);
}

std::vector<TrainRow> to_rows(const std::vector<TrainRecord>& history, const std::string& method,
                              double a0) {
  std::vector<TrainRow> rows;
  rows.reserve(history.size());
  for (const TrainRecord& rec : history) {
    TrainRow r;
    r.epoch = rec.epoch;
    r.method = method;
    r.a0 = a0;
    r.loss = rec.loss;
    r.param = rec.params.size() > 0 ? rec.params[0] : 0.0;
    r.terminal_variance = rec.terminal_variance;
    r.grad_norm = rec.grad_norm;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace odeflow::cli
