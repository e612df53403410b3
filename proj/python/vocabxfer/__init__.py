from ._vocabxfer import *  # noqa: F401,F403
from ._vocabxfer import VocabError, Vocabulary, EmbeddingMatrix, TransferPlan  # noqa: F401
