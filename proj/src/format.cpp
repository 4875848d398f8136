#include "tfm/format.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <set>
#include <system_error>

#include "tfm/error.hpp"

namespace tfm {

std::string format_double(double v)
{
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc())
  {
    return "nan";
  }
  return std::string(buf, ptr);
}

std::string format_sig(double v, int significant_digits)
{
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general,
                                 significant_digits);
  if (ec != std::errc())
  {
    return "nan";
  }
  return std::string(buf, ptr);
}

double parse_double(std::string_view text, std::string_view what)
{
  if (text == "inf" || text == "+inf" || text == "infinity")
  {
    return std::numeric_limits<double>::infinity();
  }
  double value = 0.0;
  auto const *first = text.data();
  auto const *last  = text.data() + text.size();
  if (first != last && *first == '+')
  {
    ++first;
  }
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty())
  {
    throw ConfigError(std::string(what) + ": not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::uint64_t parse_u64(std::string_view text, std::string_view what)
{
  std::uint64_t value = 0;
  auto [ptr, ec]      = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
  {
    throw ConfigError(std::string(what) + ": not a non-negative integer: '" +
                      std::string(text) + "'");
  }
  return value;
}

namespace {

std::string_view trim(std::string_view s)
{
  auto const ws    = " \t\r\n";
  auto       first = s.find_first_not_of(ws);
  if (first == std::string_view::npos)
  {
    return {};
  }
  auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValues parse_key_values(std::string_view text)
{
  KeyValues             out;
  std::set<std::string> seen;
  std::size_t           line_no = 0;
  while (!text.empty())
  {
    ++line_no;
    auto             nl   = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (auto hash = line.find('#'); hash != std::string_view::npos)
    {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty())
    {
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
    {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty())
    {
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    }
    if (!seen.insert(key).second)
    {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

std::vector<std::string> split_list(std::string_view text)
{
  std::vector<std::string> out;
  while (true)
  {
    auto comma = text.find(',');
    auto piece = trim(text.substr(0, comma));
    if (!piece.empty())
    {
      out.emplace_back(piece);
    }
    if (comma == std::string_view::npos)
    {
      break;
    }
    text = text.substr(comma + 1);
  }
  return out;
}

}  // namespace tfm
