#include <gtest/gtest.h>

#include <sstream>

#include "tfm/chain.hpp"
#include "tfm/error.hpp"

using namespace tfm;

TEST(Sha256, StandardVectors)
{
  EXPECT_EQ(to_hex(hash_bytes("")), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(to_hex(hash_bytes("abc")), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(to_hex(hash_bytes("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq")),
            "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST(Hex, RoundTripAndErrors)
{
  auto b = from_hex("00ff10");
  EXPECT_EQ(b, (Bytes{0x00, 0xff, 0x10}));
  EXPECT_EQ(to_hex(b), "00ff10");
  EXPECT_THROW(from_hex("abc"), ParameterError);
  EXPECT_THROW(from_hex("zz"), ParameterError);
}

TEST(Merkle, ThreeLeavesDuplicateLast)
{
  std::vector<Bytes> leaves{{'a'}, {'b'}, {'c'}};
  auto               h = [](std::initializer_list<Hash32> parts) {
    Bytes buf;
    for (auto const &p : parts)
      buf.insert(buf.end(), p.begin(), p.end());
    return hash_bytes(buf);
  };
  Hash32 ha = hash_bytes("a"), hb = hash_bytes("b"), hc = hash_bytes("c");
  Hash32 expected = h({h({ha, hb}), h({hc, hc})});
  EXPECT_EQ(merkle_root(leaves), expected);
  EXPECT_EQ(merkle_root(std::span(leaves).first(1)), ha);
  EXPECT_THROW(merkle_root(std::span<Bytes const>{}), DomainError);
}

TEST(Uint256, BigEndian)
{
  Hash32 h{};
  h[31] = 1;
  EXPECT_EQ(to_uint256(h), 1);
  h[0] = 0x80;
  EXPECT_EQ(from_uint256(to_uint256(h)), h);
}

TEST(Difficulty, Threshold)
{
  Difficulty d;
  d.phi_num = 1;
  d.phi_den = 4;
  EXPECT_EQ(d.toss_threshold(), UInt256(1) << 238);
  EXPECT_DOUBLE_EQ(d.phi(), 0.25);
  d.phi_num = 5;
  EXPECT_ANY_THROW(d.validate());
}

TEST(CoinToss, ThresholdRule)
{
  Difficulty d = Difficulty::with_target_bits(240, 1, 2);
  EXPECT_EQ(coin_toss(from_uint256(d.toss_threshold() - 1), d), 0);
  EXPECT_EQ(coin_toss(from_uint256(d.toss_threshold()), d), 1);
  EXPECT_THROW(coin_toss(from_uint256(d.target), d), PreconditionError);
}

TEST(Mining, FindsValidBlockAndVerifies)
{
  Difficulty d  = Difficulty::with_target_bits(244, 1, 2);
  auto       b  = mine_block(Hash32{}, hash_bytes("r"), hash_bytes("o"), 1, d, 99);
  EXPECT_LT(to_uint256(b.block_hash), d.target);
  EXPECT_EQ(b.block_hash, b.header.hash());
  EXPECT_EQ(b.confirmed_root, b.toss == 0 ? b.header.root_rand : b.header.root_opt);
  EXPECT_TRUE(verify_block(b, d));
  auto tampered = b;
  tampered.header.nonce += 1;
  EXPECT_FALSE(verify_block(tampered, d));
  auto again = mine_block(Hash32{}, hash_bytes("r"), hash_bytes("o"), 1, d, 99);
  EXPECT_EQ(again.block_hash, b.block_hash);
}

TEST(Mining, Timeout)
{
  Difficulty d = Difficulty::with_target_bits(1, 1, 2);
  EXPECT_THROW(mine_block(Hash32{}, Hash32{}, Hash32{}, 0, d, 1, MiningOptions{100}), MiningTimeoutError);
}

TEST(ChainLog, RoundTrip)
{
  Difficulty              d = Difficulty::with_target_bits(246, 1, 2);
  std::vector<MinedBlock> chain;
  Hash32                  parent{};
  for (std::uint64_t h = 0; h < 3; ++h) {
    chain.push_back(mine_block(parent, hash_bytes("r" + std::to_string(h)), hash_bytes("o"), h, d, h));
    parent = chain.back().block_hash;
  }
  std::stringstream ss;
  write_chain_log(chain, ss);
  auto back = read_chain_log(ss);
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back[i].block_hash, chain[i].block_hash);
    EXPECT_EQ(back[i].toss, chain[i].toss);
    EXPECT_TRUE(verify_block(back[i], d));
  }
}
