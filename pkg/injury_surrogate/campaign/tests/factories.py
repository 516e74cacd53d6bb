from factory import Factory
from factory import Faker
from factory import Sequence
from factory import SubFactory

from injury_surrogate.campaign.records import InputPoint
from injury_surrogate.campaign.records import RunRecord


class InputPointFactory(Factory):
    torso_angle = Faker("pyfloat", min_value=-10, max_value=10)
    dring_z = Faker("pyfloat", min_value=-5, max_value=5)

    class Meta:
        model = InputPoint


class RunRecordFactory(Factory):
    case_id = Sequence(lambda n: n + 1)
    input = SubFactory(InputPointFactory)
    hic15 = Faker("pyfloat", min_value=15, max_value=35)
    a_t1_max = Faker("pyfloat", min_value=12, max_value=17)

    class Meta:
        model = RunRecord
