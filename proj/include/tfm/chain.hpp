#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace tfm {

using Hash32  = std::array<std::uint8_t, 32>;
using Bytes   = std::vector<std::uint8_t>;
using UInt256 = boost::multiprecision::uint256_t;

std::string to_hex(std::span<std::uint8_t const> bytes);
/// Throws ParameterError on odd length or non-hex characters.
Bytes  from_hex(std::string const &hex);
Hash32 hash_from_hex(std::string const &hex);

/// Big-endian interpretation of a 32-byte value.
UInt256 to_uint256(Hash32 const &h);
Hash32  from_uint256(UInt256 const &v);

/// SHA-256.
Hash32 hash_bytes(std::span<std::uint8_t const> data);
Hash32 hash_bytes(std::string_view text);

/// Merkle root: leaves hashed once, parents are Hash(left || right), an odd
/// level duplicates its last node. Throws DomainError on an empty leaf list.
Hash32 merkle_root(std::span<Bytes const> leaves);

/// PoW target and the rational coin-toss bias phi = phi_num / phi_den.
struct Difficulty
{
  UInt256       target  = UInt256(1) << 240;
  std::uint64_t phi_num = 1;
  std::uint64_t phi_den = 2;

  void validate() const;
  /// floor(phi_num * target / phi_den), computed without overflow.
  UInt256 toss_threshold() const;
  double  phi() const
  {
    return static_cast<double>(phi_num) / static_cast<double>(phi_den);
  }
  static Difficulty with_target_bits(unsigned bits, std::uint64_t phi_num, std::uint64_t phi_den);
};

struct BlockHeader
{
  Hash32        parent_hash{};
  Hash32        root_rand{};
  Hash32        root_opt{};
  std::uint64_t height = 0;
  std::uint64_t nonce  = 0;

  static constexpr std::size_t kSerializedSize = 32 * 3 + 8 + 8;

  /// parent || root_rand || root_opt || height (BE64) || nonce (BE64).
  std::array<std::uint8_t, kSerializedSize> serialize() const;
  Hash32                                    hash() const;
};

struct MinedBlock
{
  BlockHeader header;
  Hash32      block_hash{};
  int         toss = 1;  ///< 0: uniformly sampled set confirmed, 1: optimal set confirmed
  Hash32      confirmed_root{};
  std::uint64_t trials = 0;
};

/// 0 iff hash < floor(phi * target), else 1. Throws PreconditionError if the
/// hash is not below the target (only mined blocks are tossed).
int coin_toss(Hash32 const &block_hash, Difficulty const &difficulty);

struct MiningOptions
{
  std::uint64_t max_trials = std::uint64_t(1) << 26;
};

/// Searches nonces upward from a seeded start until Hash(header) < target,
/// then applies the biased coin toss. Throws MiningTimeoutError past max_trials.
MinedBlock mine_block(Hash32 const &parent_hash, Hash32 const &root_rand, Hash32 const &root_opt,
                      std::uint64_t height, Difficulty const &difficulty, std::uint64_t seed,
                      MiningOptions const &options = {});

/// Third-party check: recomputes hash, target, toss and confirmed root.
bool verify_block(MinedBlock const &block, Difficulty const &difficulty);

/// Chain log line format:
/// `height,parent_hash,root_rand,root_opt,nonce,block_hash,toss` (hex hashes).
void write_chain_log(std::span<MinedBlock const> chain, std::ostream &out);
std::vector<MinedBlock> read_chain_log(std::istream &in);

}  // namespace tfm
