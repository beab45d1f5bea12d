"""Fifty expression pairs exercising the approximate-match rules.

Expected outcomes are not stored here: tests recompute them with an
independent normalizer + full-DP Levenshtein oracle, so the fixture
checks the subset and >=90%-ratio rules themselves, not memorized
answers.  Organized loosely: containment, near-duplicates around the
ratio boundary, clear non-matches, and normalization trickery.
"""

PAIRS = [
    # containment after normalization (incl. the severed-hand example)
    ("the severed hand", "like the severed hand of a giant"),
    ("The Severed Hand", "like the severed hand of a giant"),
    ("a glass cathedral", "a glass cathedral"),
    ("a  glass   cathedral", "a glass cathedral"),
    ("a glass cathedral.", "a glass cathedral"),
    ("cathedral", "a glass cathedral"),
    ("the sea swallowed the sky", "sea swallowed"),
    ("Her laugh, a brittle bell", "a brittle bell"),
    ("it rained upward", "It rained upward!"),
    ("moon", "moonlight"),
    ("night", "knight"),
    ("“the sea remembers”", "the sea remembers"),
    ("A DOG BARKED", "a dog barked loudly outside"),
    ("...and then silence", "and then silence"),
    ("the orchard, at dusk,", "the orchard, at dusk"),
    ("wind", "the wind unspooled the kites"),
    # near-duplicates around the ratio boundary
    ("the quiet harbor", "the quiet harbour"),
    ("a violet dusk settled", "a violet dusk settles"),
    ("stars spilled like salt", "stars spill like salt"),
    ("a thin red thread of dawn", "a thin red thread of down"),
    ("braveword1", "braveword2"),
    ("braveday1", "braveday2"),
    ("l'appel du vide", "l’appel du vide"),
    ("the engine hummed a lullaby", "the engine hummed a dirge"),
    ("she remembered rivers", "she remembers rivers"),
    ("gulls wheeled overhead", "gulls wheel overhead"),
    ("a paper boat armada", "a paper boat armadas"),
    ("seven sparrows argued", "seven sparrows argue"),
    ("glass", "grass"),
    ("his coat of borrowed thunder", "her coat of borrowed thunder"),
    ("now, then; maybe", "now then maybe"),
    ("the the the", "the the"),
    ("twelve o'clock shadows", "twelve oclock shadows"),
    ("colour of static", "color of static"),
    ("an unfinished hallelujah", "an unfinished hallelujahs"),
    # clear non-matches
    ("abcd", "wxyz"),
    ("the winter light", "a summer shadow"),
    ("a clockwork heart", "the tide tables"),
    ("salt on the windowsill", "thunder in the basement"),
    ("she sold the piano", "he bought a trumpet"),
    ("blue", "red"),
    ("the cartographer's regret", "an atlas of small joys"),
    ("pigeons as gray commuters", "the subway exhaled"),
    ("a ladder to the attic", "stairs into the cellar"),
    ("ink dried mid-sentence", "the pen kept writing"),
    # normalization trickery and mixed cases
    ("Fog; thick as wool.", "fog thick as wool"),
    ("THE RIVER, THE RIVER", "the river the river"),
    ("what the mirror kept", "What the Mirror Kept?"),
    ("teeth of the escalator", "the escalator's teeth"),
    ("a choir of kettles", "a  choir  of  kettles..."),
    ("hunger was a season", "hunger was a reason"),
    ("the lighthouse blinked twice", "the lighthouse blinked thrice"),
]
