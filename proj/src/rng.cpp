#include "tfm/rng.hpp"

#include <cmath>

namespace tfm {

namespace {
__extension__ typedef unsigned __int128 u128;
}

std::uint64_t Rng::uniform_index(std::uint64_t n)
{
  // Lemire's multiply-shift with rejection of the biased low band.
  auto x = static_cast<u128>(engine_()) * n;
  auto low = static_cast<std::uint64_t>(x);
  if (low < n)
  {
    std::uint64_t const threshold = (0 - n) % n;
    while (low < threshold)
    {
      x   = static_cast<u128>(engine_()) * n;
      low = static_cast<std::uint64_t>(x);
    }
  }
  return static_cast<std::uint64_t>(x >> 64);
}

double Rng::normal()
{
  if (has_spare_normal_)
  {
    has_spare_normal_ = false;
    return spare_normal_;
  }
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do
  {
    u = 2.0 * uniform01() - 1.0;
    v = 2.0 * uniform01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  double const factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_       = v * factor;
  has_spare_normal_   = true;
  return u * factor;
}

double Rng::exponential(double rate)
{
  return -std::log(uniform01()) / rate;
}

std::uint64_t mix_seed(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index)
{
  return mix_seed(mix_seed(base) ^ mix_seed(index + 0x632be59bd9b4e019ULL));
}

}  // namespace tfm
