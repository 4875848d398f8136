#define OPENSSL_SUPPRESS_DEPRECATED
#include "tfm/chain.hpp"

#include <openssl/sha.h>

#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>

#include "tfm/error.hpp"
#include "tfm/format.hpp"
#include "tfm/rng.hpp"

namespace tfm {

namespace {

void put_be64(std::uint8_t *out, std::uint64_t v)
{
  for (int i = 7; i >= 0; --i)
  {
    out[i] = static_cast<std::uint8_t>(v & 0xff);
    v >>= 8;
  }
}

int hex_digit(char c)
{
  if (c >= '0' && c <= '9')
  {
    return c - '0';
  }
  if (c >= 'a' && c <= 'f')
  {
    return c - 'a' + 10;
  }
  if (c >= 'A' && c <= 'F')
  {
    return c - 'A' + 10;
  }
  return -1;
}

bool below(Hash32 const &h, Hash32 const &bound)
{
  return std::memcmp(h.data(), bound.data(), h.size()) < 0;
}

}  // namespace

std::string to_hex(std::span<std::uint8_t const> bytes)
{
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string           out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes)
  {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

Bytes from_hex(std::string const &hex)
{
  if (hex.size() % 2 != 0)
  {
    throw ParameterError("hex string has odd length");
  }
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i)
  {
    int hi = hex_digit(hex[2 * i]);
    int lo = hex_digit(hex[2 * i + 1]);
    if (hi < 0 || lo < 0)
    {
      throw ParameterError("invalid hex character");
    }
    out[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return out;
}

Hash32 hash_from_hex(std::string const &hex)
{
  auto bytes = from_hex(hex);
  if (bytes.size() != 32)
  {
    throw ParameterError("expected a 32-byte hex hash");
  }
  Hash32 h{};
  std::copy(bytes.begin(), bytes.end(), h.begin());
  return h;
}

UInt256 to_uint256(Hash32 const &h)
{
  UInt256 v;
  boost::multiprecision::import_bits(v, h.begin(), h.end(), 8, true);
  return v;
}

Hash32 from_uint256(UInt256 const &v)
{
  Hash32 h{};
  UInt256 x = v;
  for (int i = 31; i >= 0; --i)
  {
    h[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(x & 0xff);
    x >>= 8;
  }
  return h;
}

Hash32 hash_bytes(std::span<std::uint8_t const> data)
{
  Hash32 out{};
  SHA256(data.data(), data.size(), out.data());
  return out;
}

Hash32 hash_bytes(std::string_view text)
{
  return hash_bytes(std::span(reinterpret_cast<std::uint8_t const *>(text.data()), text.size()));
}

Hash32 merkle_root(std::span<Bytes const> leaves)
{
  if (leaves.empty())
  {
    throw DomainError("merkle_root: no leaves");
  }
  std::vector<Hash32> level;
  level.reserve(leaves.size());
  for (auto const &leaf : leaves)
  {
    level.push_back(hash_bytes(leaf));
  }
  std::array<std::uint8_t, 64> pair{};
  while (level.size() > 1)
  {
    if (level.size() % 2 != 0)
    {
      level.push_back(level.back());
    }
    std::vector<Hash32> next(level.size() / 2);
    for (std::size_t i = 0; i < next.size(); ++i)
    {
      std::memcpy(pair.data(), level[2 * i].data(), 32);
      std::memcpy(pair.data() + 32, level[2 * i + 1].data(), 32);
      next[i] = hash_bytes(pair);
    }
    level = std::move(next);
  }
  return level.front();
}

void Difficulty::validate() const
{
  if (target == 0)
  {
    throw ParameterError("difficulty target must be positive");
  }
  if (phi_den == 0 || phi_num > phi_den)
  {
    throw ParameterError("phi must be a fraction num/den with 0 <= num <= den, den > 0");
  }
}

UInt256 Difficulty::toss_threshold() const
{
  using boost::multiprecision::uint512_t;
  uint512_t wide = uint512_t(target) * phi_num / phi_den;
  return static_cast<UInt256>(wide);
}

Difficulty Difficulty::with_target_bits(unsigned bits, std::uint64_t phi_num,
                                        std::uint64_t phi_den)
{
  if (bits == 0 || bits > 255)
  {
    throw ParameterError("target bits must be in [1, 255]");
  }
  Difficulty d;
  d.target  = UInt256(1) << bits;
  d.phi_num = phi_num;
  d.phi_den = phi_den;
  d.validate();
  return d;
}

std::array<std::uint8_t, BlockHeader::kSerializedSize> BlockHeader::serialize() const
{
  std::array<std::uint8_t, kSerializedSize> out{};
  std::memcpy(out.data(), parent_hash.data(), 32);
  std::memcpy(out.data() + 32, root_rand.data(), 32);
  std::memcpy(out.data() + 64, root_opt.data(), 32);
  put_be64(out.data() + 96, height);
  put_be64(out.data() + 104, nonce);
  return out;
}

Hash32 BlockHeader::hash() const
{
  auto bytes = serialize();
  return hash_bytes(bytes);
}

int coin_toss(Hash32 const &block_hash, Difficulty const &difficulty)
{
  difficulty.validate();
  auto value = to_uint256(block_hash);
  if (value >= difficulty.target)
  {
    throw PreconditionError("coin_toss: hash is not below the target");
  }
  return value < difficulty.toss_threshold() ? 0 : 1;
}

MinedBlock mine_block(Hash32 const &parent_hash, Hash32 const &root_rand, Hash32 const &root_opt,
                      std::uint64_t height, Difficulty const &difficulty, std::uint64_t seed,
                      MiningOptions const &options)
{
  difficulty.validate();
  Hash32 const target_bytes = from_uint256(difficulty.target);

  BlockHeader header;
  header.parent_hash = parent_hash;
  header.root_rand   = root_rand;
  header.root_opt    = root_opt;
  header.height      = height;
  header.nonce       = Rng(seed).next_u64();

  auto bytes = header.serialize();

  // The first 64 bytes (parent || root_rand) are nonce-independent: absorb
  // them once and resume from the midstate for every trial.
  SHA256_CTX midstate;
  SHA256_Init(&midstate);
  SHA256_Update(&midstate, bytes.data(), 64);

  Hash32 digest{};
  for (std::uint64_t trial = 1; trial <= options.max_trials; ++trial)
  {
    put_be64(bytes.data() + 104, header.nonce);
    SHA256_CTX ctx = midstate;
    SHA256_Update(&ctx, bytes.data() + 64, bytes.size() - 64);
    SHA256_Final(digest.data(), &ctx);
    if (below(digest, target_bytes))
    {
      MinedBlock block;
      block.header         = header;
      block.block_hash     = digest;
      block.toss           = coin_toss(digest, difficulty);
      block.confirmed_root = block.toss == 0 ? root_rand : root_opt;
      block.trials         = trial;
      return block;
    }
    ++header.nonce;
  }
  throw MiningTimeoutError("mine_block: no valid nonce within " +
                           std::to_string(options.max_trials) + " trials");
}

bool verify_block(MinedBlock const &block, Difficulty const &difficulty)
{
  if (block.header.hash() != block.block_hash)
  {
    return false;
  }
  if (to_uint256(block.block_hash) >= difficulty.target)
  {
    return false;
  }
  int toss = coin_toss(block.block_hash, difficulty);
  auto expected_root = toss == 0 ? block.header.root_rand : block.header.root_opt;
  return toss == block.toss && expected_root == block.confirmed_root;
}

void write_chain_log(std::span<MinedBlock const> chain, std::ostream &out)
{
  out << "height,parent_hash,root_rand,root_opt,nonce,block_hash,toss\n";
  for (auto const &b : chain)
  {
    out << b.header.height << ',' << to_hex(b.header.parent_hash) << ','
        << to_hex(b.header.root_rand) << ',' << to_hex(b.header.root_opt) << ','
        << b.header.nonce << ',' << to_hex(b.block_hash) << ',' << b.toss << '\n';
  }
}

std::vector<MinedBlock> read_chain_log(std::istream &in)
{
  std::string line;
  if (!std::getline(in, line) || line != "height,parent_hash,root_rand,root_opt,nonce,block_hash,toss")
  {
    throw ConfigError("chain log: missing header");
  }
  std::vector<MinedBlock> chain;
  while (std::getline(in, line))
  {
    if (line.empty())
    {
      continue;
    }
    std::stringstream        ss(line);
    std::string              cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ','))
    {
      cells.push_back(cell);
    }
    if (cells.size() != 7)
    {
      throw ConfigError("chain log: expected 7 fields");
    }
    MinedBlock b;
    b.header.height      = parse_u64(cells[0], "height");
    b.header.parent_hash = hash_from_hex(cells[1]);
    b.header.root_rand   = hash_from_hex(cells[2]);
    b.header.root_opt    = hash_from_hex(cells[3]);
    b.header.nonce       = parse_u64(cells[4], "nonce");
    b.block_hash         = hash_from_hex(cells[5]);
    b.toss               = static_cast<int>(parse_u64(cells[6], "toss"));
    b.confirmed_root     = b.toss == 0 ? b.header.root_rand : b.header.root_opt;
    chain.push_back(b);
  }
  return chain;
}

}  // namespace tfm
