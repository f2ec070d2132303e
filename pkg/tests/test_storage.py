import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spaceledger import (
    DataBlock,
    allocate,
    create_fleet,
    generate_payload,
    server_measure,
)
from spaceledger.errors import (
    AllocationError,
    BoundsError,
    CrashedServerError,
    TokenError,
    UnknownServerError,
)

GIB_32 = 34_359_738_368

# First 16 bytes of the payload recurrence, computed directly from
# x_{j+1} = (6364136223846793005*x_j + 1442695040888963407) mod 2^64
# before the generator was written.
KNOWN_PAYLOADS = {
    (42, 16): bytes.fromhex("913969a1ae06052779065b87eb53cb64"),
    (43, 16): bytes.fromhex("e9a2749c17f77fdcd4c678b3a78b20f1"),
    (0, 16): bytes.fromhex("141a9a66628f145b7b72a25d0c18e932"),
    ((1 << 64) - 1, 8): bytes.fromhex("bbb18f6bf89f9aa5"),
}


def lcg_reference(seed: int, size: int) -> bytes:
    """Direct, unoptimized statement of the payload recurrence."""
    x = seed
    out = bytearray()
    for _ in range(size):
        x = (x * 6364136223846793005 + 1442695040888963407) & ((1 << 64) - 1)
        out.append(x >> 56)
    return bytes(out)


class TestCreateFleet:
    def test_minimal_fleet(self):
        fleet = create_fleet(1)
        assert fleet.count == 1
        assert fleet.server_ids() == ["s0"]
        assert fleet.servers[0].capacity == 0
        assert not fleet.servers[0].crashed
        assert fleet.servers[0].blocks == {}

    def test_ordering(self):
        assert create_fleet(3).server_ids() == ["s0", "s1", "s2"]

    @pytest.mark.parametrize("count", [0, -1, 1025])
    def test_bounds(self, count):
        with pytest.raises(BoundsError):
            create_fleet(count)

    def test_max_fleet(self):
        assert create_fleet(1024).count == 1024


class TestAllocate:
    def test_sets_capacity(self):
        fleet = create_fleet(1)
        allocate(fleet, "s0", GIB_32)
        m = server_measure(fleet.servers[0])
        assert (m.used, m.free, m.capacity) == (0, GIB_32, GIB_32)

    def test_minimal_capacity(self):
        fleet = create_fleet(1)
        allocate(fleet, "s0", 1)
        assert server_measure(fleet.servers[0]).free == 1

    def test_reallocate_empty_server(self):
        fleet = create_fleet(1)
        allocate(fleet, "s0", 100)
        allocate(fleet, "s0", 200)
        assert fleet.servers[0].capacity == 200

    def test_occupied_server_rejected(self):
        fleet = create_fleet(1)
        allocate(fleet, "s0", 100)
        fleet.servers[0].put_block(DataBlock("blk", b"x" * 10))
        before = fleet.state_tuple()
        with pytest.raises(AllocationError):
            allocate(fleet, "s0", 500)
        assert fleet.state_tuple() == before

    def test_unknown_server(self):
        with pytest.raises(UnknownServerError):
            allocate(create_fleet(1), "s9", 100)

    def test_capacity_floor(self):
        with pytest.raises(BoundsError):
            allocate(create_fleet(1), "s0", 0)

    def test_crashed_server_rejected(self):
        fleet = create_fleet(1)
        fleet.servers[0].crashed = True
        with pytest.raises(CrashedServerError):
            allocate(fleet, "s0", 100)


class TestServerMeasure:
    def test_empty_state(self):
        fleet = create_fleet(1)
        allocate(fleet, "s0", GIB_32)
        m = server_measure(fleet.servers[0])
        assert m.used == 0 and m.free == GIB_32

    def test_one_block(self):
        fleet = create_fleet(1)
        allocate(fleet, "s0", GIB_32)
        fleet.servers[0].put_block(DataBlock("blk", generate_payload(1, 1_048_576)))
        m = server_measure(fleet.servers[0])
        assert m.used == 1_048_576
        assert m.free == 34_358_689_792
        assert m.used + m.free == m.capacity

    def test_crashed_unavailable(self):
        fleet = create_fleet(1)
        fleet.servers[0].crashed = True
        with pytest.raises(CrashedServerError):
            server_measure(fleet.servers[0])

    def test_used_counter_matches_block_table(self):
        # exhaustive enumeration of the table vs the incremental counter
        server = create_fleet(1).servers[0]
        server.capacity = 10_000
        server.put_block(DataBlock("a", b"x" * 10))
        server.put_block(DataBlock("b", b"y" * 20))
        server.swap_block(DataBlock("a", b"z" * 5))
        server.drop_block("b")
        assert server.used == sum(b.size for b in server.blocks.values()) == 5


class TestDataBlock:
    def test_size_is_payload_length(self):
        assert DataBlock("a", b"abc").size == 3

    def test_zero_size_rejected(self):
        with pytest.raises(BoundsError):
            DataBlock("a", b"")

    @pytest.mark.parametrize("bad", ["", "a" * 65, "with space", "ümlaut", "a/b"])
    def test_bad_ids(self, bad):
        with pytest.raises(TokenError):
            DataBlock(bad, b"x")

    @pytest.mark.parametrize("ok", ["a", "A-1_b", "-", "x" * 64])
    def test_good_ids(self, ok):
        assert DataBlock(ok, b"x").block_id == ok


class TestGeneratePayload:
    @pytest.mark.parametrize(("key", "want"), sorted(KNOWN_PAYLOADS.items()))
    def test_known_values(self, key, want):
        seed, size = key
        assert generate_payload(seed, size) == want

    def test_deterministic(self):
        assert generate_payload(42, 16) == generate_payload(42, 16)

    def test_seed_sensitivity(self):
        assert generate_payload(42, 16) != generate_payload(43, 16)

    @pytest.mark.parametrize("size", [1, 2, 65535, 65536, 65537, 131072, 131073])
    def test_chunk_boundaries_match_reference(self, size):
        assert generate_payload(987654321, size) == lcg_reference(987654321, size)

    def test_size_zero_rejected(self):
        with pytest.raises(BoundsError):
            generate_payload(42, 0)

    def test_seed_out_of_range(self):
        with pytest.raises(BoundsError):
            generate_payload(1 << 64, 4)
        with pytest.raises(BoundsError):
            generate_payload(-1, 4)

    @given(seed=st.integers(0, (1 << 64) - 1), size=st.integers(1, 512))
    @settings(max_examples=200, deadline=None)
    def test_matches_reference(self, seed, size):
        got = generate_payload(seed, size)
        assert len(got) == size
        assert got == lcg_reference(seed, size)
