# numerical rank: a pivot counts iff it exceeds RANK_TOL times the largest pivot
RANK_TOL = 1e-9

# orthonormality / unit-norm checks
ORTHO_TOL = 1e-12

# membership slabs are inflated by this much unless the caller says otherwise
MEMBERSHIP_TOL = 1e-9

# two slab normals closer than this (up to sign) are the same facet direction
NORMAL_MERGE_TOL = 1e-9

# slice vertices closer than this are one vertex
VERTEX_DEDUP_TOL = 1e-9

# a hit whose free coordinate is within NEAR_BOUNDARY_FACTOR * tol of a face boundary is flagged
NEAR_BOUNDARY_FACTOR = 10

# relative determinant below which a k x k face system counts as singular
SINGULAR_TOL = 1e-12

# rejection sampling
MAX_PROPOSALS = 1_000_000
PROPOSAL_BATCH = 64

# monte carlo: results depend on the chunk size, never on the worker count
CHUNK_SIZE = 1000
MAX_ORIENTATION_REDRAWS = 100

# subset enumeration is exponential in n
MAX_DIMENSION = 20

RNG_ALGORITHM = 'numpy.random.PCG64+SeedSequence'
MAX_SEED = 2**64 - 1
